#pragma once

#include <string_view>
#include <vector>

#include "faasim/sim/types.hpp"

namespace faasim::sim {

struct PoolView {
  int pool_id = 0;
  int cpu_capacity = 0;
  int mem_capacity = 0;
  int cpu_free = 0;
  int mem_free = 0;
};

struct RunningOpView {
  std::string op_id;
  std::string pipeline_id;
  Tick elapsed = 0;
  int cpu_req = 0;
  int mem_req = 0;
  Tick duration_hint = 0;
  WorkloadClass workload_class = WorkloadClass::batch;
};

struct OpView {
  std::string op_id;
  std::string pipeline_id;
  int cpu_req = 0;
  int mem_req = 0;
  Tick duration_hint = 0;
  std::vector<std::string> deps;
  OpStatus status = OpStatus::waiting;
};

struct PipelineArrivalView {
  std::string pipeline_id;
  WorkloadClass workload_class = WorkloadClass::batch;
  Tick arrival_tick = 0;
  std::vector<OpView> ops;
};

// Read-only executor surface handed to policies each tick. Free capacities
// reflect the state at invocation; they do not update as the policy emits
// decisions within the tick.
class ExecutorView {
 public:
  virtual ~ExecutorView() = default;

  virtual int num_pools() const = 0;
  virtual PoolView pool(int pool_id) const = 0;
  // Ops running in the given pool, ordered by op id.
  virtual std::vector<RunningOpView> running(int pool_id) const = 0;
  // Currently-ready ops of an in-flight pipeline, in spec order. Empty for
  // unknown, completed, failed, or not-yet-arrived pipelines.
  virtual std::vector<OpView> ready_ops(std::string_view pipeline_id) const = 0;
};

}  // namespace faasim::sim
