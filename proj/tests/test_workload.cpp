#include <doctest.h>

#include <set>

#include "faasim/sim/engine.hpp"
#include "faasim/workload/workload.hpp"

using namespace faasim;
using namespace faasim::workload;

TEST_CASE("generate_trace is a pure function of (params, seed)") {
  const WorkloadParams params = preset_mixed_heavy_tailed();
  const Trace a = generate_trace(params, 42);
  const Trace b = generate_trace(params, 42);
  CHECK(a == b);
  CHECK(a.params_fingerprint == b.params_fingerprint);
}

TEST_CASE("different seeds differ but share the fingerprint") {
  const WorkloadParams params = preset_mixed_heavy_tailed();
  const Trace a = generate_trace(params, 1);
  const Trace b = generate_trace(params, 2);
  CHECK(a.params_fingerprint == b.params_fingerprint);
  CHECK(a.pipelines != b.pipelines);
}

TEST_CASE("different params change the fingerprint") {
  WorkloadParams params = preset_mixed_heavy_tailed();
  const std::string base = params_fingerprint(params);
  params.arrival_rate += 0.001;
  CHECK(params_fingerprint(params) != base);
}

TEST_CASE("vanishing arrival rate yields an empty trace") {
  WorkloadParams params = preset_interactive_heavy();
  params.arrival_rate = 1e-9;
  const Trace trace = generate_trace(params, 7);
  CHECK(trace.pipelines.empty());
}

TEST_CASE("generated pipelines satisfy the structural invariants") {
  for (std::uint64_t seed : {3ull, 4ull, 5ull}) {
    for (const auto& preset : preset_names()) {
      const Trace trace = generate_trace(preset_by_name(preset), seed);
      CHECK_NOTHROW(sim::validate_pipelines(trace.pipelines));
      sim::Tick previous = 0;
      for (const auto& pipe : trace.pipelines) {
        CHECK(pipe.arrival_tick >= previous);
        CHECK(pipe.arrival_tick <= preset_by_name(preset).horizon);
        previous = pipe.arrival_tick;
        CHECK(pipe.timeout >= sim::critical_path(pipe));
        // non-first-layer ops depend on at least one other op
        bool any_dep = pipe.ops.size() == 1;
        for (const auto& op : pipe.ops) any_dep = any_dep || !op.deps.empty();
        CHECK(any_dep);
      }
    }
  }
}

TEST_CASE("interactive fraction is honored within 5 points over 1000+ pipelines") {
  WorkloadParams params = preset_mixed_heavy_tailed();
  params.horizon = 40000;
  params.arrival_rate = 0.05;
  const Trace trace = generate_trace(params, 99);
  REQUIRE(trace.pipelines.size() >= 1000);
  std::int64_t interactive = 0;
  for (const auto& pipe : trace.pipelines) {
    if (pipe.workload_class == sim::WorkloadClass::interactive) ++interactive;
  }
  const double fraction = static_cast<double>(interactive) / trace.pipelines.size();
  CHECK(std::abs(fraction - params.interactive_fraction) < 0.05);
}

TEST_CASE("invalid params are rejected") {
  WorkloadParams params = preset_interactive_heavy();
  params.arrival_rate = 0.0;
  CHECK_THROWS_AS(generate_trace(params, 1), InvalidParams);

  params = preset_interactive_heavy();
  params.interactive_fraction = 1.5;
  CHECK_THROWS_AS(generate_trace(params, 1), InvalidParams);

  params = preset_interactive_heavy();
  params.ops_range = {5, 2};
  CHECK_THROWS_AS(generate_trace(params, 1), InvalidParams);

  params = preset_interactive_heavy();
  params.timeout_factor = 0.5;
  CHECK_THROWS_AS(generate_trace(params, 1), InvalidParams);
}

TEST_CASE("canonical suite: six traces, two per preset, deterministic") {
  const auto suite = canonical_suite();
  REQUIRE(suite.size() == 6);
  const auto again = canonical_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(suite[i].name == again[i].name);
    CHECK(suite[i].trace == again[i].trace);
  }
  // traces pair up by fingerprint: (0,1), (2,3), (4,5)
  for (std::size_t i = 0; i < 6; i += 2) {
    CHECK(suite[i].trace.params_fingerprint == suite[i + 1].trace.params_fingerprint);
    CHECK(suite[i].trace.seed == kCanonicalSeedA);
    CHECK(suite[i + 1].trace.seed == kCanonicalSeedB);
  }
  std::set<std::string> fingerprints;
  for (const auto& named : suite) fingerprints.insert(named.trace.params_fingerprint);
  CHECK(fingerprints.size() == 3);
}

TEST_CASE("canonical traces clear the canonical pool shapes") {
  const auto config = canonical_sim_config();
  int max_cpu = 0;
  for (const auto& pool : config.pools) max_cpu = std::max(max_cpu, pool.cpu_capacity);
  for (const auto& named : canonical_suite()) {
    for (const auto& pipe : named.trace.pipelines) {
      for (const auto& op : pipe.ops) {
        CHECK(op.cpu_req <= max_cpu);
      }
    }
  }
}
