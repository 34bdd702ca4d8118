#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace faasim::sim {

using Tick = std::int64_t;

enum class WorkloadClass { interactive, batch };

const char* to_string(WorkloadClass c);

// One schedulable function within a pipeline DAG.
struct OpSpec {
  std::string op_id;
  std::string pipeline_id;
  int cpu_req = 1;
  int mem_req = 1;  // megabytes
  Tick duration = 1;
  std::vector<std::string> deps;  // op ids within the same pipeline

  friend bool operator==(const OpSpec&, const OpSpec&) = default;
};

struct PipelineSpec {
  std::string pipeline_id;
  Tick arrival_tick = 0;
  WorkloadClass workload_class = WorkloadClass::batch;
  std::vector<OpSpec> ops;
  Tick timeout = 1;  // ticks after arrival before the pipeline is failed

  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

struct PoolConfig {
  int pool_id = 0;
  int cpu_capacity = 1;
  int mem_capacity = 1;

  friend bool operator==(const PoolConfig&, const PoolConfig&) = default;
};

struct SimConfig {
  std::vector<PoolConfig> pools;
  Tick max_ticks = 1;
  Tick waiting_bound = 1;  // starvation monitor threshold, ticks
};

struct Assignment {
  std::string op_id;
  int pool_id = 0;
};

struct Suspension {
  std::string op_id;
};

enum class FailureReason { timeout };

struct FailureNotice {
  std::string pipeline_id;
  FailureReason reason = FailureReason::timeout;
  Tick tick = 0;
};

enum class OpStatus { waiting, ready, running, done };
enum class PipelineStatus { in_flight, completed, failed };
enum class Outcome { completed, failed, unfinished };

const char* to_string(OpStatus s);
const char* to_string(Outcome o);

struct CompletionRecord {
  std::string pipeline_id;
  Tick arrival_tick = 0;
  Tick terminal_tick = 0;
  Outcome outcome = Outcome::completed;
  std::optional<Tick> latency;  // set for completed pipelines only
};

enum class ViolationKind {
  oversubscription,
  not_ready,
  unknown_op,
  unknown_pool,
  duplicate_assignment,
  suspend_not_running,
  waiting_bound_exceeded,
};

const char* to_string(ViolationKind k);

struct ViolationEvent {
  Tick tick = 0;
  ViolationKind kind = ViolationKind::oversubscription;
  std::optional<std::string> op_id;
  std::optional<int> pool_id;
  std::string message;
};

struct SimMetrics {
  double throughput = 0.0;  // completed pipelines per 1000 ticks
  std::optional<Tick> p99_latency;
  std::optional<Tick> median_latency;
  std::int64_t completed = 0;
  std::int64_t failed = 0;
  std::int64_t unfinished = 0;
  std::int64_t violations = 0;
  Tick elapsed_ticks = 0;
};

// One accepted assignment, for golden-log equivalence checks.
struct AssignmentRecord {
  Tick tick = 0;
  std::string op_id;
  int pool_id = 0;

  friend bool operator==(const AssignmentRecord&, const AssignmentRecord&) = default;
};

// Longest dependency chain by summed duration.
Tick critical_path(const PipelineSpec& pipeline);

}  // namespace faasim::sim
