#include <algorithm>
#include <memory>

#include "faasim/sim/engine.hpp"

namespace faasim::sim {

namespace {

std::shared_ptr<const PreparedTrace> prepare(std::vector<PipelineSpec> pipelines) {
  auto prepared = std::make_shared<PreparedTrace>();
  std::stable_sort(pipelines.begin(), pipelines.end(),
                   [](const PipelineSpec& a, const PipelineSpec& b) {
                     return a.arrival_tick < b.arrival_tick;
                   });
  prepared->pipelines = std::move(pipelines);
  prepared->successors.resize(prepared->pipelines.size());
  prepared->dep_count.resize(prepared->pipelines.size());
  for (int p = 0; p < static_cast<int>(prepared->pipelines.size()); ++p) {
    const auto& pipe = prepared->pipelines[p];
    prepared->pipeline_index.emplace(pipe.pipeline_id, p);
    prepared->successors[p].resize(pipe.ops.size());
    prepared->dep_count[p].resize(pipe.ops.size());
    std::map<std::string, int> local;
    for (int i = 0; i < static_cast<int>(pipe.ops.size()); ++i) {
      prepared->op_index.emplace(pipe.ops[i].op_id, PreparedTrace::OpRef{p, i});
      local.emplace(pipe.ops[i].op_id, i);
    }
    for (int i = 0; i < static_cast<int>(pipe.ops.size()); ++i) {
      prepared->dep_count[p][i] = static_cast<int>(pipe.ops[i].deps.size());
      for (const auto& dep : pipe.ops[i].deps) {
        prepared->successors[p][local.at(dep)].push_back(i);
      }
    }
  }
  return prepared;
}

void free_capacity(SimState& state, int pool_id, const OpSpec& op) {
  state.pool_usage[pool_id].cpu_used -= op.cpu_req;
  state.pool_usage[pool_id].mem_used -= op.mem_req;
}

void mark_ready(SimState& state, const std::string& op_id, Tick visible_from) {
  auto& rt = state.op_state.at(op_id);
  rt.status = OpStatus::ready;
  rt.ready_since = visible_from;
  rt.wait_flagged = false;
  state.ready_set.insert(op_id);
}

// Removes the op from scheduling consideration without completing it.
void mark_dead(SimState& state, const std::string& op_id) {
  auto& rt = state.op_state.at(op_id);
  rt.status = OpStatus::waiting;
  rt.ready_since = -1;
  state.ready_set.erase(op_id);
}

}  // namespace

SimState init_sim(std::vector<PipelineSpec> trace, const SimConfig& config) {
  validate_config(config);
  validate_pipelines(trace);

  SimState state;
  state.trace = prepare(std::move(trace));
  state.config = config;
  state.pool_usage.resize(config.pools.size());
  state.done_ops.resize(state.trace->pipelines.size(), 0);

  int max_pool_cpu = 0;
  for (const auto& pool : config.pools) max_pool_cpu = std::max(max_pool_cpu, pool.cpu_capacity);
  for (const auto& pipe : state.trace->pipelines) {
    for (const auto& op : pipe.ops) {
      if (op.cpu_req > max_pool_cpu) {
        throw InvalidTrace("op " + op.op_id + " requests more cpu than any pool provides");
      }
      OpRuntime rt;
      rt.deps_remaining = static_cast<int>(op.deps.size());
      state.op_state.emplace(op.op_id, rt);
    }
  }
  return state;
}

int StateExecutorView::num_pools() const {
  return static_cast<int>(state_.config.pools.size());
}

PoolView StateExecutorView::pool(int pool_id) const {
  const auto& cfg = state_.config.pools.at(pool_id);
  const auto& usage = state_.pool_usage.at(pool_id);
  return PoolView{pool_id, cfg.cpu_capacity, cfg.mem_capacity, cfg.cpu_capacity - usage.cpu_used,
                  cfg.mem_capacity - usage.mem_used};
}

std::vector<RunningOpView> StateExecutorView::running(int pool_id) const {
  std::vector<RunningOpView> out;
  for (const auto& [op_id, run] : state_.running) {
    if (run.pool_id != pool_id) continue;
    const auto& ref = state_.trace->op_index.at(op_id);
    const auto& op = state_.trace->op(ref);
    const auto& pipe = state_.trace->pipelines[ref.pipeline];
    out.push_back(RunningOpView{op.op_id, op.pipeline_id, run.elapsed, op.cpu_req, op.mem_req,
                                op.duration, pipe.workload_class});
  }
  return out;
}

std::vector<OpView> StateExecutorView::ready_ops(std::string_view pipeline_id) const {
  std::vector<OpView> out;
  auto pit = state_.trace->pipeline_index.find(std::string(pipeline_id));
  if (pit == state_.trace->pipeline_index.end()) return out;
  const auto& pipe = state_.trace->pipelines[pit->second];
  auto sit = state_.pipeline_status.find(pipe.pipeline_id);
  if (sit == state_.pipeline_status.end() || sit->second != PipelineStatus::in_flight) return out;
  for (const auto& op : pipe.ops) {
    const auto& rt = state_.op_state.at(op.op_id);
    if (rt.status != OpStatus::ready) continue;
    // Ops that become ready at the end of this tick are not yet visible.
    if (rt.ready_since > state_.clock) continue;
    out.push_back(OpView{op.op_id, op.pipeline_id, op.cpu_req, op.mem_req, op.duration, op.deps,
                         OpStatus::ready});
  }
  return out;
}

std::optional<ViolationEvent> validate_assignment(const SimState& state, const Assignment& a,
                                                  const TickTally& tally) {
  auto make = [&](ViolationKind kind, std::string msg) {
    ViolationEvent ev;
    ev.tick = state.clock;
    ev.kind = kind;
    ev.op_id = a.op_id;
    ev.pool_id = a.pool_id;
    ev.message = std::move(msg);
    return ev;
  };

  auto oit = state.trace->op_index.find(a.op_id);
  if (oit == state.trace->op_index.end()) {
    return make(ViolationKind::unknown_op, "assignment names unknown op " + a.op_id);
  }
  if (tally.assigned_ops.count(a.op_id) > 0) {
    return make(ViolationKind::duplicate_assignment,
                "op " + a.op_id + " was already assigned this tick");
  }
  const auto& rt = state.op_state.at(a.op_id);
  if (rt.status != OpStatus::ready || rt.ready_since > state.clock) {
    return make(ViolationKind::not_ready,
                "op " + a.op_id + " is not ready (status " + to_string(rt.status) + ")");
  }
  if (a.pool_id < 0 || a.pool_id >= static_cast<int>(state.config.pools.size())) {
    return make(ViolationKind::unknown_pool,
                "pool " + std::to_string(a.pool_id) + " does not exist");
  }
  const auto& op = state.trace->op(oit->second);
  const auto& cfg = state.config.pools[a.pool_id];
  const auto& usage = state.pool_usage[a.pool_id];
  const auto& extra = tally.extra[a.pool_id];
  const int cpu_free = cfg.cpu_capacity - usage.cpu_used - extra.cpu_used;
  const int mem_free = cfg.mem_capacity - usage.mem_used - extra.mem_used;
  if (op.cpu_req > cpu_free || op.mem_req > mem_free) {
    return make(ViolationKind::oversubscription,
                "op " + a.op_id + " needs " + std::to_string(op.cpu_req) + " cpu / " +
                    std::to_string(op.mem_req) + " mem but pool " + std::to_string(a.pool_id) +
                    " has " + std::to_string(cpu_free) + " cpu / " + std::to_string(mem_free) +
                    " mem free");
  }
  return std::nullopt;
}

std::optional<ViolationEvent> validate_suspension(const SimState& state, const Suspension& s) {
  auto make = [&](ViolationKind kind, std::string msg) {
    ViolationEvent ev;
    ev.tick = state.clock;
    ev.kind = kind;
    ev.op_id = s.op_id;
    ev.message = std::move(msg);
    return ev;
  };
  if (state.trace->op_index.find(s.op_id) == state.trace->op_index.end()) {
    return make(ViolationKind::unknown_op, "suspension names unknown op " + s.op_id);
  }
  if (state.running.find(s.op_id) == state.running.end()) {
    return make(ViolationKind::suspend_not_running, "op " + s.op_id + " is not running");
  }
  return std::nullopt;
}

void step(SimState& state, Policy& policy) {
  const Tick now = state.clock;
  const auto& trace = *state.trace;

  // 1. deliver arrivals
  std::vector<PipelineArrivalView> arrivals;
  while (state.next_arrival < trace.pipelines.size() &&
         trace.pipelines[state.next_arrival].arrival_tick == now) {
    const auto& pipe = trace.pipelines[state.next_arrival];
    state.pipeline_status.emplace(pipe.pipeline_id, PipelineStatus::in_flight);
    ++state.arrived_count;
    PipelineArrivalView view{pipe.pipeline_id, pipe.workload_class, pipe.arrival_tick, {}};
    for (const auto& op : pipe.ops) {
      if (op.deps.empty()) mark_ready(state, op.op_id, now);
      view.ops.push_back(OpView{op.op_id, op.pipeline_id, op.cpu_req, op.mem_req, op.duration,
                                op.deps, state.op_state.at(op.op_id).status});
    }
    arrivals.push_back(std::move(view));
    ++state.next_arrival;
  }

  // 2. fail timed-out pipelines, kill their ops, queue notices
  for (auto& [pipeline_id, status] : state.pipeline_status) {
    if (status != PipelineStatus::in_flight) continue;
    const auto& pipe = trace.pipelines[trace.pipeline_index.at(pipeline_id)];
    if (now - pipe.arrival_tick < pipe.timeout) continue;
    status = PipelineStatus::failed;
    ++state.terminal_count;
    for (const auto& op : pipe.ops) {
      auto rit = state.running.find(op.op_id);
      if (rit != state.running.end()) {
        free_capacity(state, rit->second.pool_id, op);
        state.running.erase(rit);
      }
      if (state.op_state.at(op.op_id).status != OpStatus::done) mark_dead(state, op.op_id);
    }
    state.completion_log.push_back(
        CompletionRecord{pipeline_id, pipe.arrival_tick, now, Outcome::failed, std::nullopt});
    state.pending_failures.push_back(FailureNotice{pipeline_id, FailureReason::timeout, now});
  }

  // 3. invoke the policy
  std::vector<FailureNotice> failures;
  failures.swap(state.pending_failures);
  StateExecutorView view(state);
  ScheduleResult decisions;
  try {
    decisions = policy.schedule(ScheduleInputs{failures, arrivals, view});
  } catch (PolicyError& err) {
    if (!err.fault_tick) err.fault_tick = now;
    throw;
  }

  // 4a. suspensions, in emission order
  for (const auto& susp : decisions.suspensions) {
    if (auto violation = validate_suspension(state, susp)) {
      state.violation_log.push_back(*violation);
      continue;
    }
    auto rit = state.running.find(susp.op_id);
    const auto& op = trace.op(trace.op_index.at(susp.op_id));
    free_capacity(state, rit->second.pool_id, op);
    state.running.erase(rit);
    // Restart semantics: progress is lost, the op is immediately ready again.
    mark_ready(state, susp.op_id, now);
    ++state.accepted_suspensions;
  }

  // 4b. assignments, in emission order, each validated against the usage at
  // the start of the apply phase plus the tally of entries accepted so far
  TickTally tally;
  tally.extra.resize(state.config.pools.size());
  for (const auto& assign : decisions.assignments) {
    if (auto violation = validate_assignment(state, assign, tally)) {
      state.violation_log.push_back(*violation);
      continue;
    }
    const auto& op = trace.op(trace.op_index.at(assign.op_id));
    tally.extra[assign.pool_id].cpu_used += op.cpu_req;
    tally.extra[assign.pool_id].mem_used += op.mem_req;
    tally.assigned_ops.insert(assign.op_id);
    state.running.emplace(assign.op_id, RunningOp{assign.pool_id, 0});
    auto& rt = state.op_state.at(assign.op_id);
    rt.status = OpStatus::running;
    rt.ready_since = -1;
    state.ready_set.erase(assign.op_id);
    state.assignment_log.push_back(AssignmentRecord{now, assign.op_id, assign.pool_id});
  }
  for (std::size_t pool = 0; pool < state.pool_usage.size(); ++pool) {
    state.pool_usage[pool].cpu_used += tally.extra[pool].cpu_used;
    state.pool_usage[pool].mem_used += tally.extra[pool].mem_used;
  }

  // 5. advance running ops; completions become visible next tick
  std::vector<std::string> newly_done;
  for (auto& [op_id, run] : state.running) {
    run.elapsed += 1;
    const auto& op = trace.op(trace.op_index.at(op_id));
    if (run.elapsed == op.duration) newly_done.push_back(op_id);
  }
  for (const auto& op_id : newly_done) {
    const auto ref = trace.op_index.at(op_id);
    const auto& op = trace.op(ref);
    free_capacity(state, state.running.at(op_id).pool_id, op);
    state.running.erase(op_id);
    state.op_state.at(op_id).status = OpStatus::done;
    ++state.done_ops[ref.pipeline];

    const auto& pipe = trace.pipelines[ref.pipeline];
    auto& pstatus = state.pipeline_status.at(pipe.pipeline_id);
    if (state.done_ops[ref.pipeline] == static_cast<int>(pipe.ops.size())) {
      pstatus = PipelineStatus::completed;
      ++state.terminal_count;
      state.completion_log.push_back(CompletionRecord{pipe.pipeline_id, pipe.arrival_tick, now + 1,
                                                      Outcome::completed,
                                                      now + 1 - pipe.arrival_tick});
      continue;
    }
    for (int succ : trace.successors[ref.pipeline][ref.op]) {
      const auto& succ_op = pipe.ops[succ];
      auto& succ_rt = state.op_state.at(succ_op.op_id);
      if (--succ_rt.deps_remaining == 0 && succ_rt.status == OpStatus::waiting &&
          pstatus == PipelineStatus::in_flight) {
        mark_ready(state, succ_op.op_id, now + 1);
      }
    }
  }

  // bounded-waiting monitor (observe only)
  for (const auto& op_id : state.ready_set) {
    auto& rt = state.op_state.at(op_id);
    if (rt.wait_flagged || rt.ready_since > now) continue;
    if (now - rt.ready_since > state.config.waiting_bound) {
      rt.wait_flagged = true;
      ViolationEvent ev;
      ev.tick = now;
      ev.kind = ViolationKind::waiting_bound_exceeded;
      ev.op_id = op_id;
      ev.message = "op " + op_id + " has been ready for " + std::to_string(now - rt.ready_since) +
                   " ticks (bound " + std::to_string(state.config.waiting_bound) + ")";
      state.violation_log.push_back(ev);
    }
  }

  // 6.
  state.clock = now + 1;
}

RunResult run(const std::vector<PipelineSpec>& trace, Policy& policy, const SimConfig& config) {
  SimState state = init_sim(trace, config);
  policy.init();
  while (state.clock < config.max_ticks && !state.all_terminal()) {
    step(state, policy);
  }
  if (!state.all_terminal()) {
    // Cutoff: everything not terminal counts as unfinished, including
    // pipelines that never arrived.
    for (const auto& pipe : state.trace->pipelines) {
      auto it = state.pipeline_status.find(pipe.pipeline_id);
      if (it != state.pipeline_status.end() && it->second != PipelineStatus::in_flight) continue;
      state.completion_log.push_back(CompletionRecord{pipe.pipeline_id, pipe.arrival_tick,
                                                      std::max(state.clock, pipe.arrival_tick),
                                                      Outcome::unfinished, std::nullopt});
    }
  }
  RunResult result;
  result.metrics = compute_metrics(state.completion_log, state.violation_log, state.clock);
  result.completion_log = std::move(state.completion_log);
  result.violation_log = std::move(state.violation_log);
  result.assignment_log = std::move(state.assignment_log);
  return result;
}

}  // namespace faasim::sim
