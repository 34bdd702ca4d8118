#include <algorithm>
#include <cmath>

#include "faasim/sim/engine.hpp"

namespace faasim::sim {

namespace {

// Nearest-rank percentile: rank = ceil(q/100 * n), 1-indexed on ascending sort.
Tick nearest_rank(const std::vector<Tick>& sorted_ascending, int q) {
  const auto n = static_cast<std::int64_t>(sorted_ascending.size());
  std::int64_t rank = (q * n + 99) / 100;
  if (rank < 1) rank = 1;
  return sorted_ascending[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

SimMetrics compute_metrics(const std::vector<CompletionRecord>& completion_log,
                           const std::vector<ViolationEvent>& violation_log, Tick elapsed_ticks) {
  SimMetrics m;
  m.elapsed_ticks = elapsed_ticks;
  m.violations = static_cast<std::int64_t>(violation_log.size());

  std::vector<Tick> latencies;
  for (const auto& rec : completion_log) {
    switch (rec.outcome) {
      case Outcome::completed:
        ++m.completed;
        if (rec.latency) latencies.push_back(*rec.latency);
        break;
      case Outcome::failed:
        ++m.failed;
        break;
      case Outcome::unfinished:
        ++m.unfinished;
        break;
    }
  }

  m.throughput = elapsed_ticks > 0 ? static_cast<double>(m.completed) / elapsed_ticks * 1000.0 : 0.0;
  if (!latencies.empty()) {
    std::sort(latencies.begin(), latencies.end());
    m.p99_latency = nearest_rank(latencies, 99);
    m.median_latency = nearest_rank(latencies, 50);
  }
  return m;
}

}  // namespace faasim::sim
