#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "faasim/llm/client.hpp"
#include "faasim/policy/lang.hpp"
#include "faasim/sim/engine.hpp"
#include "faasim/workload/workload.hpp"

namespace faasim::discovery {

enum class TargetMetric { throughput, p99_latency };

const char* to_string(TargetMetric m);
std::optional<TargetMetric> target_metric_from_string(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class BudgetImpossible : public std::runtime_error {
 public:
  explicit BudgetImpossible(const std::string& msg) : std::runtime_error(msg) {}
};

struct DiscoveryConfig {
  int iterations = 1;
  TargetMetric target_metric = TargetMetric::throughput;
  std::int64_t token_budget = 0;
  std::vector<workload::NamedTrace> traces;
  sim::SimConfig sim_config;
  llm::ProviderConfig provider;
  llm::GenerationParams generation;
  std::filesystem::path out_dir = "runs";
  std::string run_id;  // generated from the clock when empty
};

enum class Role { system, user, assistant, feedback };

const char* to_string(Role r);

struct ContextEntry {
  Role role = Role::user;
  std::string text;
  std::optional<int> iteration;
  bool compressed = false;
};

using Context = std::vector<ContextEntry>;

std::int64_t context_tokens(const Context& context);

struct EvalError {
  policy::InterpError error;
  int trace_index = -1;  // -1: before any trace ran (parse/static)
  std::optional<sim::Tick> tick;
};

struct IterationRecord {
  int iteration = 0;
  std::string policy_source;  // raw response text when extraction failed
  bool valid = false;
  std::vector<sim::SimMetrics> per_trace_metrics;            // valid only
  std::map<std::string, std::int64_t> violation_kind_counts;  // valid only, across traces
  std::optional<double> score;                               // valid only
  std::optional<EvalError> error;                            // invalid only
  std::string feedback_text;

  // ledger slice
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  double cost_usd = 0.0;
  double latency_seconds = 0.0;
};

struct BestPolicy {
  std::string policy_source;
  double score = 0.0;
  int iteration = 0;
  double improvement_vs_baseline = 1.0;  // ratio of best score to baseline score
};

struct RunLedger {
  struct Entry {
    int iteration = 0;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    double cost_usd = 0.0;
    double latency_seconds = 0.0;
  };
  std::vector<Entry> entries;

  double total_cost_usd() const;
  double total_time_seconds() const;
};

// [system, user]; throws ConfigError when the result exceeds token_budget.
Context build_initial_context(const DiscoveryConfig& config);

// The canonical prompts (also embedded in build_initial_context).
std::string system_prompt(const DiscoveryConfig& config);
std::string user_prompt(const DiscoveryConfig& config);

struct EvalOutcome {
  std::vector<sim::SimMetrics> per_trace_metrics;
  std::map<std::string, std::int64_t> violation_kind_counts;  // aggregated across traces
  double score = 0.0;  // median of the target metric across traces
};

using EvalResult = std::variant<EvalOutcome, EvalError>;

// Parse + validate once, then run every trace with fresh policy state.
EvalResult evaluate_policy(const std::string& policy_source,
                           const std::vector<workload::NamedTrace>& traces,
                           const sim::SimConfig& sim_config, TargetMetric metric);

// Same evaluation path on the native FIFO baseline.
EvalOutcome evaluate_baseline(const std::vector<workload::NamedTrace>& traces,
                              const sim::SimConfig& sim_config, TargetMetric metric);

// Median with even counts averaged; lower-is-better handled by callers.
double median(std::vector<double> values);

std::string synthesize_feedback(const IterationRecord& record, std::optional<double> best_so_far,
                                double baseline_score);

// Keeps prompts, the best iteration, and the last three iterations
// verbatim; older iterations collapse to one-line summaries, dropped
// oldest-first if the budget still overflows.
Context compress_context(const Context& context, std::int64_t token_budget,
                         std::optional<int> best_iteration);

std::optional<BestPolicy> select_best(const std::vector<IterationRecord>& records,
                                      TargetMetric metric, double baseline_score);

struct DiscoveryResult {
  std::optional<BestPolicy> best;
  std::vector<IterationRecord> records;
  RunLedger ledger;
  std::filesystem::path run_dir;
};

// Algorithm: K iterations of request -> extract -> evaluate -> feedback ->
// append -> compress-if-over-budget. Every policy text is persisted to the
// run directory whether or not it was valid. ProviderError propagates after
// partial records are flushed.
DiscoveryResult run_discovery(const DiscoveryConfig& config, llm::Provider& provider);

}  // namespace faasim::discovery
