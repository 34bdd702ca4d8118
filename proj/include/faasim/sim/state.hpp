#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "faasim/sim/types.hpp"

namespace faasim::sim {

// Immutable per-run view of the trace plus lookup tables.
struct PreparedTrace {
  std::vector<PipelineSpec> pipelines;  // sorted by arrival_tick (stable)

  struct OpRef {
    int pipeline = 0;
    int op = 0;
  };
  std::map<std::string, OpRef> op_index;
  std::map<std::string, int> pipeline_index;
  // successors[p][i] = indices of ops in pipeline p that depend on op i
  std::vector<std::vector<std::vector<int>>> successors;
  // dep_count[p][i] = number of deps of op i
  std::vector<std::vector<int>> dep_count;

  const OpSpec& op(const OpRef& ref) const { return pipelines[ref.pipeline].ops[ref.op]; }
};

struct PoolUsage {
  int cpu_used = 0;
  int mem_used = 0;
};

struct RunningOp {
  int pool_id = 0;
  Tick elapsed = 0;
};

struct OpRuntime {
  OpStatus status = OpStatus::waiting;
  Tick ready_since = -1;      // tick at which the op became policy-visible ready
  bool wait_flagged = false;  // waiting-bound event already emitted for this ready span
  int deps_remaining = 0;
};

struct SimState {
  std::shared_ptr<const PreparedTrace> trace;
  SimConfig config;

  Tick clock = 0;
  std::vector<PoolUsage> pool_usage;
  std::map<std::string, RunningOp> running;
  std::map<std::string, OpRuntime> op_state;
  std::map<std::string, PipelineStatus> pipeline_status;  // arrived pipelines only
  std::set<std::string> ready_set;

  std::vector<FailureNotice> pending_failures;
  std::vector<CompletionRecord> completion_log;
  std::vector<ViolationEvent> violation_log;
  std::vector<AssignmentRecord> assignment_log;

  std::int64_t arrived_count = 0;
  std::int64_t terminal_count = 0;
  std::int64_t accepted_suspensions = 0;
  std::vector<int> done_ops;  // per pipeline index
  std::size_t next_arrival = 0;

  bool all_terminal() const {
    return terminal_count == static_cast<std::int64_t>(trace->pipelines.size());
  }
};

}  // namespace faasim::sim
