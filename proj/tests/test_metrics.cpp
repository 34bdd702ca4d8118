#include <doctest.h>

#include <algorithm>

#include "faasim/sim/engine.hpp"
#include "faasim/workload/rng.hpp"

using namespace faasim;
using namespace faasim::sim;

namespace {

std::vector<CompletionRecord> completions(const std::vector<Tick>& latencies) {
  std::vector<CompletionRecord> log;
  for (std::size_t i = 0; i < latencies.size(); ++i) {
    log.push_back(CompletionRecord{"p" + std::to_string(i), 0, latencies[i], Outcome::completed,
                                   latencies[i]});
  }
  return log;
}

// Independent nearest-rank oracle: sort ascending, pick entry ceil(q*n/100).
Tick percentile_oracle(std::vector<Tick> values, int q) {
  std::sort(values.begin(), values.end());
  const auto n = static_cast<std::int64_t>(values.size());
  std::int64_t rank = (q * n + 99) / 100;
  if (rank < 1) rank = 1;
  return values[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

TEST_CASE("one completed pipeline: throughput and degenerate percentiles") {
  SimMetrics m = compute_metrics(completions({10}), {}, 100);
  CHECK(m.throughput == doctest::Approx(10.0));
  CHECK(m.p99_latency == 10);
  CHECK(m.median_latency == 10);
  CHECK(m.completed == 1);
}

TEST_CASE("latencies 1..100: p99 = 99, median = 50, throughput = 100") {
  std::vector<Tick> latencies(100);
  for (int i = 0; i < 100; ++i) latencies[i] = i + 1;
  SimMetrics m = compute_metrics(completions(latencies), {}, 1000);
  CHECK(m.p99_latency == 99);
  CHECK(m.median_latency == 50);
  CHECK(m.throughput == doctest::Approx(100.0));
}

TEST_CASE("no completions: zero throughput, absent percentiles") {
  std::vector<CompletionRecord> log;
  for (int i = 0; i < 3; ++i) {
    log.push_back(CompletionRecord{"p" + std::to_string(i), 0, 5, Outcome::failed, std::nullopt});
  }
  SimMetrics m = compute_metrics(log, {}, 50);
  CHECK(m.throughput == 0.0);
  CHECK(m.failed == 3);
  CHECK(!m.p99_latency.has_value());
  CHECK(!m.median_latency.has_value());
}

TEST_CASE("empty log with zero elapsed ticks") {
  SimMetrics m = compute_metrics({}, {}, 0);
  CHECK(m.throughput == 0.0);
  CHECK(m.completed == 0);
}

TEST_CASE("outcome buckets and violation count") {
  std::vector<CompletionRecord> log = completions({4, 7});
  log.push_back(CompletionRecord{"px", 0, 9, Outcome::failed, std::nullopt});
  log.push_back(CompletionRecord{"py", 3, 20, Outcome::unfinished, std::nullopt});
  std::vector<ViolationEvent> violations(5);
  SimMetrics m = compute_metrics(log, violations, 20);
  CHECK(m.completed == 2);
  CHECK(m.failed == 1);
  CHECK(m.unfinished == 1);
  CHECK(m.violations == 5);
  CHECK(m.throughput == doctest::Approx(100.0));
}

TEST_CASE("percentiles match the sort-and-index oracle on random multisets") {
  workload::Xoshiro256pp rng(0xfacade);
  for (int round = 0; round < 200; ++round) {
    const auto n = rng.uniform_int(1, 500);
    std::vector<Tick> latencies;
    latencies.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
      latencies.push_back(rng.uniform_int(1, 10000));
    }
    SimMetrics m = compute_metrics(completions(latencies), {}, 1000);
    CHECK(m.p99_latency == percentile_oracle(latencies, 99));
    CHECK(m.median_latency == percentile_oracle(latencies, 50));
  }
}
