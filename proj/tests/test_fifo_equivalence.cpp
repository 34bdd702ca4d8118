#include <doctest.h>

#include "faasim/policy/policy.hpp"
#include "faasim/sim/engine.hpp"
#include "faasim/workload/workload.hpp"

using namespace faasim;

// The full six-trace check is acceptance criterion 4; here two traces keep
// the unit suite fast while still covering both preset shapes.
TEST_CASE("DSL FIFO matches native FIFO assignment logs") {
  auto created = policy::DslPolicy::create(policy::fifo_source());
  auto& dsl = *std::get<std::unique_ptr<policy::DslPolicy>>(created);
  policy::NativeFifoPolicy native;

  const auto config = workload::canonical_sim_config();
  const auto suite = workload::canonical_suite();
  for (const auto& name : {"interactive_11", "mixed_12"}) {
    const workload::NamedTrace* trace = nullptr;
    for (const auto& named : suite) {
      if (named.name == name) trace = &named;
    }
    REQUIRE(trace != nullptr);
    sim::RunResult a = sim::run(trace->trace.pipelines, dsl, config);
    sim::RunResult b = sim::run(trace->trace.pipelines, native, config);
    CHECK(a.assignment_log == b.assignment_log);
    CHECK(a.metrics.completed == b.metrics.completed);
    CHECK(a.metrics.throughput == b.metrics.throughput);
    CHECK(a.violation_log.size() == b.violation_log.size());
  }
}

TEST_CASE("native FIFO example: two small ops share one pool the same tick") {
  sim::PipelineSpec a;
  a.pipeline_id = "pa";
  a.ops = {sim::OpSpec{"pa.o0", "pa", 2, 128, 3, {}}};
  a.timeout = 20;
  sim::PipelineSpec b = a;
  b.pipeline_id = "pb";
  b.ops = {sim::OpSpec{"pb.o0", "pb", 2, 128, 3, {}}};

  sim::SimConfig config;
  config.pools = {{0, 4, 4096}};
  config.max_ticks = 30;
  config.waiting_bound = 10;

  policy::NativeFifoPolicy fifo;
  sim::RunResult result = sim::run({a, b}, fifo, config);
  REQUIRE(result.assignment_log.size() == 2);
  CHECK(result.assignment_log[0] == sim::AssignmentRecord{0, "pa.o0", 0});
  CHECK(result.assignment_log[1] == sim::AssignmentRecord{0, "pb.o0", 0});
}

TEST_CASE("native FIFO skips a blocked head without blocking ready ops behind it") {
  // pa.o1 (head of queue after o0 completes... actually: pa has a dep chain,
  // pb is independent and ready; FIFO must place pb while pa.o1 waits.
  sim::PipelineSpec a;
  a.pipeline_id = "pa";
  a.ops = {sim::OpSpec{"pa.o0", "pa", 4, 128, 5, {}},
           sim::OpSpec{"pa.o1", "pa", 4, 128, 1, {"pa.o0"}}};
  a.timeout = 30;
  sim::PipelineSpec b;
  b.pipeline_id = "pb";
  b.arrival_tick = 1;
  b.ops = {sim::OpSpec{"pb.o0", "pb", 4, 128, 2, {}}};
  b.timeout = 20;

  sim::SimConfig config;
  config.pools = {{0, 4, 4096}, {1, 4, 4096}};
  config.max_ticks = 40;
  config.waiting_bound = 20;

  policy::NativeFifoPolicy fifo;
  sim::RunResult result = sim::run({a, b}, fifo, config);
  REQUIRE(result.assignment_log.size() >= 2);
  // pa.o0 takes pool 0 at tick 0; pb.o0 is ready at tick 1 while pa.o1 is
  // not; pb lands in pool 0's... pool 0 is full, so pool 1.
  CHECK(result.assignment_log[0] == sim::AssignmentRecord{0, "pa.o0", 0});
  CHECK(result.assignment_log[1] == sim::AssignmentRecord{1, "pb.o0", 1});
  CHECK(result.metrics.completed == 2);
}

TEST_CASE("FIFO drops queue entries for pipelines that failed") {
  // One op can never run (needs 4 cpu, pool is busy with a 6-tick op), the
  // pipeline times out, and the queue entry must disappear rather than be
  // assigned later.
  sim::PipelineSpec hog;
  hog.pipeline_id = "hog";
  hog.ops = {sim::OpSpec{"hog.o0", "hog", 4, 128, 8, {}}};
  hog.timeout = 40;
  sim::PipelineSpec doomed;
  doomed.pipeline_id = "doomed";
  doomed.arrival_tick = 1;
  doomed.ops = {sim::OpSpec{"doomed.o0", "doomed", 4, 128, 2, {}}};
  doomed.timeout = 3;

  sim::SimConfig config;
  config.pools = {{0, 4, 4096}};
  config.max_ticks = 40;
  config.waiting_bound = 30;

  policy::NativeFifoPolicy fifo;
  sim::RunResult result = sim::run({hog, doomed}, fifo, config);
  CHECK(result.metrics.completed == 1);
  CHECK(result.metrics.failed == 1);
  for (const auto& record : result.assignment_log) {
    CHECK(record.op_id != "doomed.o0");
  }
}
