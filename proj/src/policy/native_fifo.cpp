#include <algorithm>

#include "faasim/policy/policy.hpp"

namespace faasim::policy {

void NativeFifoPolicy::init() { waiting_queue_.clear(); }

sim::ScheduleResult NativeFifoPolicy::schedule(const sim::ScheduleInputs& inputs) {
  // Mirrors policies/fifo.pol step for step; the two must produce
  // identical assignment logs.
  for (const auto& failure : inputs.failures) {
    std::erase_if(waiting_queue_, [&](const QueuedOp& op) {
      return op.pipeline_id == failure.pipeline_id;
    });
  }

  for (const auto& pipeline : inputs.new_pipelines) {
    for (const auto& op : pipeline.ops) {
      waiting_queue_.push_back(QueuedOp{op.op_id, op.pipeline_id, op.cpu_req, op.mem_req});
    }
  }

  sim::ScheduleResult result;
  std::vector<std::string> assigned;
  auto is_assigned = [&](const std::string& op_id) {
    return std::find(assigned.begin(), assigned.end(), op_id) != assigned.end();
  };

  const int pools = inputs.executor.num_pools();
  for (int pool_id = 0; pool_id < pools; ++pool_id) {
    const sim::PoolView pool = inputs.executor.pool(pool_id);
    int rem_cpu = pool.cpu_free;
    int rem_mem = pool.mem_free;
    for (const auto& op : waiting_queue_) {
      if (is_assigned(op.op_id)) continue;
      const auto ready = inputs.executor.ready_ops(op.pipeline_id);
      const bool is_ready = std::any_of(ready.begin(), ready.end(), [&](const sim::OpView& r) {
        return r.op_id == op.op_id;
      });
      if (is_ready && op.cpu_req <= rem_cpu && op.mem_req <= rem_mem) {
        result.assignments.push_back(sim::Assignment{op.op_id, pool_id});
        assigned.push_back(op.op_id);
        rem_cpu -= op.cpu_req;
        rem_mem -= op.mem_req;
      }
    }
  }

  std::erase_if(waiting_queue_, [&](const QueuedOp& op) { return is_assigned(op.op_id); });
  return result;
}

}  // namespace faasim::policy
