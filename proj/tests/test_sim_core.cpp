#include <doctest.h>

#include <functional>

#include "faasim/sim/engine.hpp"

using namespace faasim;
using namespace faasim::sim;

namespace {

OpSpec make_op(std::string id, std::string pipe, int cpu, int mem, Tick dur,
               std::vector<std::string> deps = {}) {
  return OpSpec{std::move(id), std::move(pipe), cpu, mem, dur, std::move(deps)};
}

PipelineSpec single_op_pipeline(const std::string& id, Tick arrival, int cpu, Tick dur,
                                Tick timeout) {
  PipelineSpec pipe;
  pipe.pipeline_id = id;
  pipe.arrival_tick = arrival;
  pipe.workload_class = WorkloadClass::interactive;
  pipe.ops = {make_op(id + ".o0", id, cpu, 128, dur)};
  pipe.timeout = timeout;
  return pipe;
}

SimConfig one_pool(int cpu, Tick max_ticks = 100, Tick waiting_bound = 50) {
  SimConfig config;
  config.pools = {{0, cpu, 4096}};
  config.max_ticks = max_ticks;
  config.waiting_bound = waiting_bound;
  return config;
}

// Scriptable policy for exercising the apply phase.
class ScriptPolicy : public Policy {
 public:
  using Fn = std::function<ScheduleResult(const ScheduleInputs&)>;
  explicit ScriptPolicy(Fn fn) : fn_(std::move(fn)) {}
  void init() override {}
  ScheduleResult schedule(const ScheduleInputs& inputs) override { return fn_(inputs); }

 private:
  Fn fn_;
};

class IdlePolicy : public Policy {
 public:
  void init() override {}
  ScheduleResult schedule(const ScheduleInputs&) override { return {}; }
};

}  // namespace

TEST_CASE("init_sim: empty trace") {
  SimState state = init_sim({}, one_pool(4));
  CHECK(state.clock == 0);
  CHECK(state.arrived_count == 0);
  CHECK(state.all_terminal());
}

TEST_CASE("init_sim: self-dependency is rejected") {
  PipelineSpec pipe;
  pipe.pipeline_id = "p0";
  pipe.ops = {make_op("p0.o0", "p0", 1, 1, 1, {"p0.o0"})};
  pipe.timeout = 10;
  CHECK_THROWS_AS(init_sim({pipe}, one_pool(4)), InvalidTrace);
}

TEST_CASE("init_sim: dependency cycle is rejected") {
  PipelineSpec pipe;
  pipe.pipeline_id = "p0";
  pipe.ops = {make_op("p0.o0", "p0", 1, 1, 1, {"p0.o1"}),
              make_op("p0.o1", "p0", 1, 1, 1, {"p0.o0"})};
  pipe.timeout = 10;
  CHECK_THROWS_AS(init_sim({pipe}, one_pool(4)), InvalidTrace);
}

TEST_CASE("init_sim: timeout below critical path is rejected") {
  PipelineSpec pipe = single_op_pipeline("p0", 0, 1, 5, 4);
  CHECK_THROWS_AS(init_sim({pipe}, one_pool(4)), InvalidTrace);
}

TEST_CASE("init_sim: op wider than every pool is rejected") {
  PipelineSpec pipe = single_op_pipeline("p0", 0, 9, 1, 10);
  CHECK_THROWS_AS(init_sim({pipe}, one_pool(8)), InvalidTrace);
}

TEST_CASE("init_sim: bad configs are rejected") {
  CHECK_THROWS_AS(init_sim({}, SimConfig{}), InvalidConfig);
  SimConfig gap;
  gap.pools = {{1, 4, 512}};
  gap.max_ticks = 10;
  gap.waiting_bound = 5;
  CHECK_THROWS_AS(init_sim({}, gap), InvalidConfig);
}

TEST_CASE("single op on one pool: assigned at tick 0, done after tick 2, latency 3") {
  // 4-cpu pool, one op needing 2 cpu for 3 ticks, scheduled first tick.
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 2, 3, 10)};
  ScriptPolicy greedy([](const ScheduleInputs& in) {
    ScheduleResult out;
    for (const auto& pipe : in.new_pipelines) {
      for (const auto& op : pipe.ops) out.assignments.push_back({op.op_id, 0});
    }
    return out;
  });
  RunResult result = run(trace, greedy, one_pool(4));
  REQUIRE(result.assignment_log.size() == 1);
  CHECK(result.assignment_log[0] == AssignmentRecord{0, "p0.o0", 0});
  REQUIRE(result.completion_log.size() == 1);
  CHECK(result.completion_log[0].outcome == Outcome::completed);
  CHECK(result.completion_log[0].terminal_tick == 3);
  CHECK(result.completion_log[0].latency == 3);
  CHECK(result.metrics.completed == 1);
  CHECK(result.metrics.elapsed_ticks == 3);
}

TEST_CASE("assignment to a nonexistent pool is skipped and logged") {
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 2, 3, 10)};
  ScriptPolicy bad([](const ScheduleInputs& in) {
    ScheduleResult out;
    for (const auto& pipe : in.new_pipelines) {
      for (const auto& op : pipe.ops) out.assignments.push_back({op.op_id, 99});
    }
    return out;
  });
  SimState state = init_sim(trace, one_pool(4));
  bad.init();
  step(state, bad);
  CHECK(state.running.empty());
  REQUIRE(state.violation_log.size() == 1);
  CHECK(state.violation_log[0].kind == ViolationKind::unknown_pool);
}

TEST_CASE("suspending a non-running op is skipped and logged") {
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 2, 3, 10)};
  ScriptPolicy bad([](const ScheduleInputs&) {
    ScheduleResult out;
    out.suspensions.push_back({"p0.o0"});
    return out;
  });
  SimState state = init_sim(trace, one_pool(4));
  bad.init();
  step(state, bad);
  REQUIRE(state.violation_log.size() == 1);
  CHECK(state.violation_log[0].kind == ViolationKind::suspend_not_running);
  CHECK(state.op_state.at("p0.o0").status == OpStatus::ready);
}

TEST_CASE("validate_assignment verdicts") {
  std::vector<PipelineSpec> trace;
  PipelineSpec pipe;
  pipe.pipeline_id = "p0";
  pipe.ops = {make_op("p0.o0", "p0", 2, 128, 2), make_op("p0.o1", "p0", 5, 128, 2),
              make_op("p0.o2", "p0", 1, 128, 2, {"p0.o0"})};
  pipe.timeout = 50;
  trace.push_back(pipe);
  SimConfig config;
  config.pools = {{0, 4, 4096}, {1, 8, 4096}};  // o1 only fits pool 1
  config.max_ticks = 100;
  config.waiting_bound = 50;
  SimState state = init_sim(trace, config);
  IdlePolicy idle;
  idle.init();
  step(state, idle);  // delivers the pipeline; o0, o1 ready

  TickTally tally;
  tally.extra.resize(2);

  CHECK(!validate_assignment(state, {"p0.o0", 0}, tally).has_value());

  auto oversub = validate_assignment(state, {"p0.o1", 0}, tally);
  REQUIRE(oversub.has_value());
  CHECK(oversub->kind == ViolationKind::oversubscription);

  auto not_ready = validate_assignment(state, {"p0.o2", 0}, tally);
  REQUIRE(not_ready.has_value());
  CHECK(not_ready->kind == ViolationKind::not_ready);

  auto unknown = validate_assignment(state, {"ghost", 0}, tally);
  REQUIRE(unknown.has_value());
  CHECK(unknown->kind == ViolationKind::unknown_op);

  auto bad_pool = validate_assignment(state, {"p0.o0", 7}, tally);
  REQUIRE(bad_pool.has_value());
  CHECK(bad_pool->kind == ViolationKind::unknown_pool);

  tally.assigned_ops.insert("p0.o0");
  auto dup = validate_assignment(state, {"p0.o0", 0}, tally);
  REQUIRE(dup.has_value());
  CHECK(dup->kind == ViolationKind::duplicate_assignment);
}

TEST_CASE("same-tick assignments accumulate against the tally") {
  // Two 3-cpu ops into a 4-cpu pool the same tick: first lands, second is
  // rejected as oversubscription, usage stays within capacity.
  PipelineSpec pipe;
  pipe.pipeline_id = "p0";
  pipe.ops = {make_op("p0.o0", "p0", 3, 128, 3), make_op("p0.o1", "p0", 3, 128, 3)};
  pipe.timeout = 50;
  ScriptPolicy both([](const ScheduleInputs& in) {
    ScheduleResult out;
    for (const auto& p : in.new_pipelines) {
      for (const auto& op : p.ops) out.assignments.push_back({op.op_id, 0});
    }
    return out;
  });
  SimState state = init_sim({pipe}, one_pool(4));
  both.init();
  step(state, both);
  CHECK(state.running.size() == 1);
  CHECK(state.pool_usage[0].cpu_used == 3);
  REQUIRE(state.violation_log.size() == 1);
  CHECK(state.violation_log[0].kind == ViolationKind::oversubscription);
}

TEST_CASE("two same-tick assignments that fit together are both accepted") {
  PipelineSpec pipe;
  pipe.pipeline_id = "p0";
  pipe.ops = {make_op("p0.o0", "p0", 3, 128, 3), make_op("p0.o1", "p0", 3, 128, 3)};
  pipe.timeout = 50;
  ScriptPolicy both([](const ScheduleInputs& in) {
    ScheduleResult out;
    for (const auto& p : in.new_pipelines) {
      for (const auto& op : p.ops) out.assignments.push_back({op.op_id, 0});
    }
    return out;
  });
  SimState state = init_sim({pipe}, one_pool(8));
  both.init();
  step(state, both);
  CHECK(state.running.size() == 2);
  CHECK(state.pool_usage[0].cpu_used == 6);
  CHECK(state.violation_log.empty());
}

TEST_CASE("suspension frees capacity for a same-tick assignment and resets progress") {
  PipelineSpec a = single_op_pipeline("pa", 0, 3, 5, 50);
  PipelineSpec b = single_op_pipeline("pb", 1, 3, 2, 50);
  std::vector<PipelineSpec> trace = {a, b};

  int tick = 0;
  ScriptPolicy preempter([&tick](const ScheduleInputs& in) {
    ScheduleResult out;
    if (tick == 0) {
      out.assignments.push_back({"pa.o0", 0});
    } else if (tick == 1) {
      out.suspensions.push_back({"pa.o0"});
      out.assignments.push_back({"pb.o0", 0});
    } else {
      for (const auto& op : in.executor.ready_ops("pa")) {
        if (op.cpu_req <= in.executor.pool(0).cpu_free) out.assignments.push_back({op.op_id, 0});
      }
    }
    ++tick;
    return out;
  });

  SimState state = init_sim(trace, one_pool(4));
  preempter.init();
  step(state, preempter);  // pa.o0 running, elapsed 1
  CHECK(state.running.at("pa.o0").elapsed == 1);
  step(state, preempter);  // suspend pa.o0, assign pb.o0 into the freed space
  CHECK(state.running.count("pa.o0") == 0);
  CHECK(state.running.at("pb.o0").elapsed == 1);
  CHECK(state.op_state.at("pa.o0").status == OpStatus::ready);
  CHECK(state.violation_log.empty());

  while (state.clock < state.config.max_ticks && !state.all_terminal()) {
    step(state, preempter);
  }
  // pa restarts from zero once pb is out of the way (pb occupies ticks 1-2,
  // pa reruns ticks 3-7 and completes at the end of tick 7)
  REQUIRE(state.pipeline_status.at("pa") == PipelineStatus::completed);
  bool found = false;
  for (const auto& rec : state.completion_log) {
    if (rec.pipeline_id == "pa") {
      CHECK(rec.latency == 8);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("timed-out pipeline fails, and notifies the policy exactly once") {
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 4, 3, 3)};
  std::vector<std::vector<FailureNotice>> seen;
  ScriptPolicy watcher([&seen](const ScheduleInputs& in) {
    seen.push_back(in.failures);
    return ScheduleResult{};  // never assigns; the pipeline must time out
  });
  SimState state = init_sim(trace, one_pool(4));
  watcher.init();
  for (int i = 0; i < 5; ++i) step(state, watcher);

  CHECK(state.pipeline_status.at("p0") == PipelineStatus::failed);
  REQUIRE(seen.size() == 5);
  CHECK(seen[3].size() == 1);  // failure fires at tick 3 = arrival + timeout
  CHECK(seen[3][0].pipeline_id == "p0");
  CHECK(seen[3][0].tick == 3);
  CHECK(seen[4].empty());  // delivered exactly once
  REQUIRE(state.completion_log.size() == 1);
  CHECK(state.completion_log[0].outcome == Outcome::failed);
  CHECK(!state.completion_log[0].latency.has_value());
}

TEST_CASE("killing a running op on timeout frees its pool") {
  PipelineSpec slow = single_op_pipeline("p0", 0, 4, 10, 10);
  PipelineSpec next = single_op_pipeline("p1", 12, 4, 2, 20);
  // The op only starts at tick 3, so it cannot finish before arrival+timeout.
  int tick = 0;
  ScriptPolicy delayed([&tick](const ScheduleInputs& in) {
    ScheduleResult out;
    if (tick >= 3) {
      for (const auto& pid : {"p0", "p1"}) {
        for (const auto& op : in.executor.ready_ops(pid)) {
          if (op.cpu_req <= in.executor.pool(0).cpu_free) {
            out.assignments.push_back({op.op_id, 0});
          }
        }
      }
    }
    ++tick;
    return out;
  });
  SimState state = init_sim({slow, next}, one_pool(4, 40));
  delayed.init();
  for (int i = 0; i < 11; ++i) step(state, delayed);
  // p0 started at tick 3, timed out at tick 10 with elapsed 7 of 10
  CHECK(state.pipeline_status.at("p0") == PipelineStatus::failed);
  CHECK(state.running.empty());
  CHECK(state.pool_usage[0].cpu_used == 0);

  while (state.clock < state.config.max_ticks && !state.all_terminal()) step(state, delayed);
  CHECK(state.pipeline_status.at("p1") == PipelineStatus::completed);
}

TEST_CASE("dependency chain: successors become ready only after deps complete") {
  PipelineSpec pipe;
  pipe.pipeline_id = "p0";
  pipe.ops = {make_op("p0.o0", "p0", 1, 64, 2), make_op("p0.o1", "p0", 1, 64, 1, {"p0.o0"})};
  pipe.timeout = 20;
  ScriptPolicy eager([](const ScheduleInputs& in) {
    ScheduleResult out;
    for (const auto& op : in.executor.ready_ops("p0")) {
      if (op.cpu_req <= in.executor.pool(0).cpu_free) out.assignments.push_back({op.op_id, 0});
    }
    return out;
  });
  SimState state = init_sim({pipe}, one_pool(4));
  eager.init();
  step(state, eager);  // o0 assigned (tick 0)
  CHECK(state.op_state.at("p0.o1").status == OpStatus::waiting);
  step(state, eager);  // o0 completes at end of tick 1; o1 visible next tick
  CHECK(state.op_state.at("p0.o0").status == OpStatus::done);
  CHECK(state.op_state.at("p0.o1").status == OpStatus::ready);
  step(state, eager);  // o1 assigned at tick 2
  CHECK(state.running.count("p0.o1") == 1);
  step(state, eager);  // o1 completes at end of tick 3
  CHECK(state.pipeline_status.at("p0") == PipelineStatus::completed);
  // latency = terminal(4) - arrival(0): critical path 3 plus one tick of
  // scheduling gap between o0 finishing and o1 starting
  CHECK(state.completion_log[0].latency == 4);
}

TEST_CASE("conservation holds at every tick") {
  std::vector<PipelineSpec> trace = {
      single_op_pipeline("p0", 0, 2, 3, 12),
      single_op_pipeline("p1", 1, 2, 2, 8),
      single_op_pipeline("p2", 4, 4, 1, 6),
      single_op_pipeline("p3", 30, 3, 2, 9),
  };
  ScriptPolicy eager([](const ScheduleInputs& in) {
    ScheduleResult out;
    int free = in.executor.pool(0).cpu_free;
    for (const auto& pid : {"p0", "p1", "p2", "p3"}) {
      for (const auto& op : in.executor.ready_ops(pid)) {
        if (op.cpu_req <= free) {
          out.assignments.push_back({op.op_id, 0});
          free -= op.cpu_req;
        }
      }
    }
    return out;
  });
  SimState state = init_sim(trace, one_pool(4, 60));
  eager.init();
  while (state.clock < state.config.max_ticks && !state.all_terminal()) {
    step(state, eager);
    std::int64_t in_flight = 0, completed = 0, failed = 0;
    for (const auto& [id, status] : state.pipeline_status) {
      if (status == PipelineStatus::in_flight) ++in_flight;
      if (status == PipelineStatus::completed) ++completed;
      if (status == PipelineStatus::failed) ++failed;
    }
    std::int64_t arrived = 0;
    for (const auto& pipe : trace) {
      if (pipe.arrival_tick < state.clock) ++arrived;
    }
    CHECK(in_flight + completed + failed == arrived);
  }
  CHECK(state.all_terminal());
}

TEST_CASE("waiting-bound monitor flags starved ready ops exactly once per span") {
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 2, 2, 100)};
  IdlePolicy idle;
  SimState state = init_sim(trace, one_pool(4, 100, 5));
  idle.init();
  for (int i = 0; i < 20; ++i) step(state, idle);
  int flagged = 0;
  for (const auto& v : state.violation_log) {
    if (v.kind == ViolationKind::waiting_bound_exceeded) ++flagged;
  }
  CHECK(flagged == 1);
  // the op became ready at tick 0 and was flagged once waited > 5
  CHECK(state.violation_log[0].tick == 6);
}

TEST_CASE("unfinished pipelines at cutoff are a separate bucket") {
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 2, 30, 50)};
  IdlePolicy idle;
  RunResult result = run(trace, idle, one_pool(4, 10, 100));
  CHECK(result.metrics.completed == 0);
  CHECK(result.metrics.failed == 0);
  CHECK(result.metrics.unfinished == 1);
  REQUIRE(result.completion_log.size() == 1);
  CHECK(result.completion_log[0].outcome == Outcome::unfinished);
  CHECK(result.completion_log[0].terminal_tick == 10);
}

TEST_CASE("runs are deterministic: identical logs on repeat") {
  std::vector<PipelineSpec> trace = {
      single_op_pipeline("p0", 0, 2, 3, 12),
      single_op_pipeline("p1", 0, 2, 5, 20),
      single_op_pipeline("p2", 2, 4, 2, 10),
  };
  auto run_once = [&] {
    ScriptPolicy eager([](const ScheduleInputs& in) {
      ScheduleResult out;
      int free = in.executor.pool(0).cpu_free;
      for (const auto& pid : {"p0", "p1", "p2"}) {
        for (const auto& op : in.executor.ready_ops(pid)) {
          if (op.cpu_req <= free) {
            out.assignments.push_back({op.op_id, 0});
            free -= op.cpu_req;
          }
        }
      }
      return out;
    });
    return run(trace, eager, one_pool(4, 60));
  };
  RunResult a = run_once();
  RunResult b = run_once();
  CHECK(a.assignment_log == b.assignment_log);
  CHECK(a.metrics.completed == b.metrics.completed);
  CHECK(a.metrics.throughput == b.metrics.throughput);
}

TEST_CASE("policy errors surface with the faulting tick") {
  std::vector<PipelineSpec> trace = {single_op_pipeline("p0", 0, 2, 3, 12)};
  int tick = 0;
  ScriptPolicy bomb([&tick](const ScheduleInputs&) -> ScheduleResult {
    if (tick++ == 2) throw PolicyError("boom");
    return {};
  });
  SimState state = init_sim(trace, one_pool(4));
  bomb.init();
  step(state, bomb);
  step(state, bomb);
  try {
    step(state, bomb);
    FAIL("expected PolicyError");
  } catch (const PolicyError& e) {
    CHECK(e.fault_tick == 2);
  }
}
