#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "faasim/discovery/discovery.hpp"
#include "faasim/sim/json.hpp"

namespace faasim::discovery {

namespace {

using nlohmann::json;

std::string now_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", std::gmtime(&t));
  return buf;
}

json provider_json(const llm::ProviderConfig& provider) {
  // Never the key itself; only the variable name.
  json out{{"kind", provider.kind == llm::ProviderKind::http_chat ? "http_chat" : "scripted"},
           {"model", provider.model},
           {"timeout_seconds", provider.timeout_seconds},
           {"max_retries", provider.max_retries},
           {"price_usd_per_mtok_in", provider.price_table.usd_per_mtok_in},
           {"price_usd_per_mtok_out", provider.price_table.usd_per_mtok_out}};
  if (!provider.endpoint.empty()) out["endpoint"] = provider.endpoint;
  if (!provider.api_key_env_var.empty()) out["api_key_env_var"] = provider.api_key_env_var;
  if (!provider.script_dir.empty()) out["script_dir"] = provider.script_dir;
  return out;
}

json config_json(const DiscoveryConfig& config) {
  json traces = json::array();
  for (const auto& named : config.traces) traces.push_back(named.name);
  json pools = json::array();
  for (const auto& pool : config.sim_config.pools) {
    pools.push_back(json{{"pool_id", pool.pool_id},
                         {"cpu_capacity", pool.cpu_capacity},
                         {"mem_capacity", pool.mem_capacity}});
  }
  json generation{{"model", config.generation.model}};
  if (config.generation.temperature) generation["temperature"] = *config.generation.temperature;
  if (config.generation.reasoning_effort) {
    generation["reasoning_effort"] = *config.generation.reasoning_effort;
  }
  return json{{"iterations", config.iterations},
              {"target_metric", to_string(config.target_metric)},
              {"token_budget", config.token_budget},
              {"traces", std::move(traces)},
              {"sim_config",
               json{{"pools", std::move(pools)},
                    {"max_ticks", config.sim_config.max_ticks},
                    {"waiting_bound", config.sim_config.waiting_bound}}},
              {"provider", provider_json(config.provider)},
              {"generation", std::move(generation)}};
}

json record_json(const IterationRecord& record) {
  json out{{"iteration", record.iteration},
           {"valid", record.valid},
           {"policy_file", "policy_" + std::to_string(record.iteration) + ".pol"},
           {"feedback", record.feedback_text},
           {"tokens_in", record.tokens_in},
           {"tokens_out", record.tokens_out},
           {"cost_usd", record.cost_usd},
           {"latency_seconds", record.latency_seconds}};
  if (record.valid) {
    out["score"] = *record.score;
    out["per_trace_metrics"] = record.per_trace_metrics;
    out["violation_kind_counts"] = record.violation_kind_counts;
  } else {
    const EvalError& fail = *record.error;
    json error{{"kind", policy::to_string(fail.error.kind)},
               {"message", fail.error.message},
               {"line", fail.error.line},
               {"column", fail.error.column},
               {"hint", fail.error.hint}};
    if (fail.trace_index >= 0) error["trace_index"] = fail.trace_index;
    if (fail.tick) error["tick"] = *fail.tick;
    out["error"] = std::move(error);
  }
  return out;
}

// Incremental writer for the run directory layout.
class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    records_.open(dir_ / "records.jsonl");
    if (!records_) {
      throw ConfigError("cannot write to run directory " + dir_.string());
    }
  }

  void write_policy(int iteration, const std::string& source) {
    std::ofstream out(dir_ / ("policy_" + std::to_string(iteration) + ".pol"));
    out << source;
    if (!source.empty() && source.back() != '\n') out << '\n';
  }

  void append_record(const IterationRecord& record) {
    records_ << record_json(record).dump() << '\n';
    records_.flush();
  }

  void write_best(const std::optional<BestPolicy>& best) {
    if (!best) return;
    std::ofstream out(dir_ / "best.pol");
    out << best->policy_source;
    if (!best->policy_source.empty() && best->policy_source.back() != '\n') out << '\n';
  }

  void write_context(const Context& context) {
    std::ofstream out(dir_ / "context_final.jsonl");
    for (const auto& entry : context) {
      json line{{"role", to_string(entry.role)},
                {"text", entry.text},
                {"compressed", entry.compressed}};
      if (entry.iteration) line["iteration"] = *entry.iteration;
      out << line.dump() << '\n';
    }
  }

  void write_manifest(const DiscoveryConfig& config, const std::string& run_id,
                      double baseline_score, const RunLedger& ledger,
                      const std::optional<BestPolicy>& best) {
    json manifest{{"run_id", run_id},
                  {"timestamp", now_timestamp()},
                  {"config", config_json(config)},
                  {"baseline_score", baseline_score},
                  {"ledger",
                   json{{"total_cost_usd", ledger.total_cost_usd()},
                        {"total_time_seconds", ledger.total_time_seconds()},
                        {"iterations", ledger.entries.size()}}}};
    if (best) {
      manifest["best"] = json{{"score", best->score},
                              {"iteration", best->iteration},
                              {"improvement_vs_baseline", best->improvement_vs_baseline}};
    } else {
      manifest["best"] = nullptr;
    }
    std::ofstream out(dir_ / "manifest.json");
    out << manifest.dump(2) << '\n';
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::ofstream records_;
};

std::vector<llm::ChatMessage> to_messages(const Context& context) {
  std::vector<llm::ChatMessage> messages;
  messages.reserve(context.size());
  for (const auto& entry : context) {
    llm::ChatRole role = llm::ChatRole::user;
    if (entry.role == Role::system) role = llm::ChatRole::system;
    if (entry.role == Role::assistant) role = llm::ChatRole::assistant;
    // feedback (and compressed summaries) go back to the model as user turns
    messages.push_back(llm::ChatMessage{role, entry.text});
  }
  return messages;
}

void validate_discovery_config(const DiscoveryConfig& config) {
  if (config.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (config.traces.empty()) throw ConfigError("at least one trace is required");
  if (config.token_budget < 1) throw ConfigError("token_budget must be >= 1");
  sim::validate_config(config.sim_config);
}

}  // namespace

DiscoveryResult run_discovery(const DiscoveryConfig& config, llm::Provider& provider) {
  validate_discovery_config(config);
  Context context = build_initial_context(config);

  const std::string run_id = config.run_id.empty() ? "run_" + now_timestamp() : config.run_id;
  RunWriter writer(config.out_dir / run_id);

  const EvalOutcome baseline =
      evaluate_baseline(config.traces, config.sim_config, config.target_metric);

  DiscoveryResult result;
  result.run_dir = writer.dir();
  std::optional<double> best_so_far;
  std::optional<int> best_iteration;

  auto better = [&](double candidate, double incumbent) {
    return config.target_metric == TargetMetric::throughput ? candidate > incumbent
                                                            : candidate < incumbent;
  };

  for (int iteration = 1; iteration <= config.iterations; ++iteration) {
    llm::CompletionResult completion;
    try {
      completion = provider.complete(to_messages(context), config.generation);
    } catch (...) {
      // Partial records are already on disk; leave a manifest for report.
      writer.write_context(context);
      writer.write_manifest(config, run_id, baseline.score, result.ledger,
                            select_best(result.records, config.target_metric, baseline.score));
      throw;
    }
    result.ledger.entries.push_back(RunLedger::Entry{iteration, completion.tokens_in,
                                                     completion.tokens_out, completion.cost_usd,
                                                     completion.latency_seconds});

    IterationRecord record;
    record.iteration = iteration;
    record.tokens_in = completion.tokens_in;
    record.tokens_out = completion.tokens_out;
    record.cost_usd = completion.cost_usd;
    record.latency_seconds = completion.latency_seconds;

    auto extracted = llm::extract_code_block(completion.text);
    if (auto* extraction_error = std::get_if<llm::ExtractionError>(&extracted)) {
      record.policy_source = completion.text;
      record.valid = false;
      record.error = EvalError{policy::InterpError{policy::ErrorKind::parse,
                                                   extraction_error->message, 0, 0,
                                                   extraction_error->hint},
                               -1, std::nullopt};
    } else {
      record.policy_source = std::get<std::string>(extracted);
      EvalResult eval = evaluate_policy(record.policy_source, config.traces, config.sim_config,
                                        config.target_metric);
      if (auto* outcome = std::get_if<EvalOutcome>(&eval)) {
        record.valid = true;
        record.per_trace_metrics = std::move(outcome->per_trace_metrics);
        record.violation_kind_counts = std::move(outcome->violation_kind_counts);
        record.score = outcome->score;
      } else {
        record.valid = false;
        record.error = std::get<EvalError>(eval);
      }
    }

    record.feedback_text = synthesize_feedback(record, best_so_far, baseline.score);
    writer.write_policy(iteration, record.policy_source);
    writer.append_record(record);

    context.push_back(ContextEntry{Role::assistant, record.policy_source, iteration, false});
    context.push_back(ContextEntry{Role::feedback, record.feedback_text, iteration, false});

    if (record.valid && (!best_so_far || better(*record.score, *best_so_far))) {
      best_so_far = *record.score;
      best_iteration = iteration;
    }

    if (context_tokens(context) > config.token_budget) {
      context = compress_context(context, config.token_budget, best_iteration);
    }

    result.records.push_back(std::move(record));
  }

  result.best = select_best(result.records, config.target_metric, baseline.score);
  writer.write_best(result.best);
  writer.write_context(context);
  writer.write_manifest(config, run_id, baseline.score, result.ledger, result.best);
  return result;
}

}  // namespace faasim::discovery
