#include <algorithm>
#include <limits>

#include "faasim/discovery/discovery.hpp"
#include "faasim/policy/policy.hpp"

namespace faasim::discovery {

const char* to_string(TargetMetric m) {
  return m == TargetMetric::throughput ? "throughput" : "p99_latency";
}

std::optional<TargetMetric> target_metric_from_string(std::string_view name) {
  if (name == "throughput") return TargetMetric::throughput;
  if (name == "p99_latency") return TargetMetric::p99_latency;
  return std::nullopt;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw std::logic_error("median of an empty set");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

double metric_value(const sim::SimMetrics& metrics, TargetMetric metric) {
  if (metric == TargetMetric::throughput) return metrics.throughput;
  // Absent p99 (no completions) scores as worst possible.
  return metrics.p99_latency ? static_cast<double>(*metrics.p99_latency)
                             : std::numeric_limits<double>::infinity();
}

EvalResult evaluate_with(sim::Policy& policy, const std::vector<workload::NamedTrace>& traces,
                         const sim::SimConfig& sim_config, TargetMetric metric) {
  EvalOutcome outcome;
  std::vector<double> values;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    try {
      sim::RunResult result = sim::run(traces[i].trace.pipelines, policy, sim_config);
      values.push_back(metric_value(result.metrics, metric));
      outcome.per_trace_metrics.push_back(result.metrics);
      for (const auto& violation : result.violation_log) {
        ++outcome.violation_kind_counts[sim::to_string(violation.kind)];
      }
    } catch (const policy::DslPolicyError& e) {
      return EvalError{e.error(), static_cast<int>(i), e.fault_tick};
    } catch (const sim::PolicyError& e) {
      policy::InterpError error{policy::ErrorKind::runtime, e.what(), 0, 0, ""};
      return EvalError{std::move(error), static_cast<int>(i), e.fault_tick};
    }
  }
  outcome.score = median(std::move(values));
  return outcome;
}

}  // namespace

EvalResult evaluate_policy(const std::string& policy_source,
                           const std::vector<workload::NamedTrace>& traces,
                           const sim::SimConfig& sim_config, TargetMetric metric) {
  auto created = policy::DslPolicy::create(policy_source);
  if (auto* error = std::get_if<policy::InterpError>(&created)) {
    return EvalError{*error, -1, std::nullopt};
  }
  auto& policy = *std::get<std::unique_ptr<policy::DslPolicy>>(created);
  return evaluate_with(policy, traces, sim_config, metric);
}

EvalOutcome evaluate_baseline(const std::vector<workload::NamedTrace>& traces,
                              const sim::SimConfig& sim_config, TargetMetric metric) {
  policy::NativeFifoPolicy fifo;
  EvalResult result = evaluate_with(fifo, traces, sim_config, metric);
  return std::get<EvalOutcome>(result);  // the native baseline cannot fault
}

std::optional<BestPolicy> select_best(const std::vector<IterationRecord>& records,
                                      TargetMetric metric, double baseline_score) {
  const IterationRecord* best = nullptr;
  for (const auto& record : records) {
    if (!record.valid || !record.score) continue;
    if (best == nullptr) {
      best = &record;
      continue;
    }
    const bool better = metric == TargetMetric::throughput ? *record.score > *best->score
                                                           : *record.score < *best->score;
    if (better) best = &record;  // ties keep the earlier iteration
  }
  if (best == nullptr) return std::nullopt;
  BestPolicy out;
  out.policy_source = best->policy_source;
  out.score = *best->score;
  out.iteration = best->iteration;
  out.improvement_vs_baseline = baseline_score != 0.0 ? out.score / baseline_score : 1.0;
  return out;
}

}  // namespace faasim::discovery
