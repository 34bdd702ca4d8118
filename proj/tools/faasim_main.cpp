#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "faasim/discovery/discovery.hpp"
#include "faasim/policy/policy.hpp"
#include "faasim/sim/json.hpp"
#include "faasim/workload/workload.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace faasim;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPolicy = 3;
constexpr int kExitProvider = 4;

class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json parsed = json::parse(in, nullptr, false);
  if (parsed.is_discarded()) throw InputError(path.string() + " is not valid JSON");
  return parsed;
}

workload::IntRange range_from(const json& j, const char* field) {
  const auto& r = j.at(field);
  return workload::IntRange{r.at(0).get<std::int64_t>(), r.at(1).get<std::int64_t>()};
}

workload::ClassParams class_from(const json& j) {
  workload::ClassParams c;
  c.duration_log_mu = j.at("duration_log_mu").get<double>();
  c.duration_log_sigma = j.at("duration_log_sigma").get<double>();
  c.cpu_range = range_from(j, "cpu_range");
  c.mem_range = range_from(j, "mem_range");
  return c;
}

workload::WorkloadParams params_from_file(const fs::path& path) {
  const json j = read_json_file(path);
  try {
    workload::WorkloadParams p;
    p.arrival_rate = j.at("arrival_rate").get<double>();
    p.horizon = j.at("horizon").get<sim::Tick>();
    p.interactive_fraction = j.at("interactive_fraction").get<double>();
    p.ops_range = range_from(j, "ops_range");
    p.layer_width_range = range_from(j, "layer_width_range");
    p.interactive = class_from(j.at("interactive"));
    p.batch = class_from(j.at("batch"));
    p.timeout_factor = j.at("timeout_factor").get<double>();
    return p;
  } catch (const json::exception& e) {
    throw InputError("bad params file " + path.string() + ": " + e.what());
  }
}

sim::SimConfig sim_config_from_json(const json& j) {
  try {
    sim::SimConfig config;
    config.pools.clear();
    for (const auto& jpool : j.at("pools")) {
      config.pools.push_back(sim::PoolConfig{jpool.at("pool_id").get<int>(),
                                             jpool.at("cpu_capacity").get<int>(),
                                             jpool.at("mem_capacity").get<int>()});
    }
    config.max_ticks = j.at("max_ticks").get<sim::Tick>();
    config.waiting_bound = j.at("waiting_bound").get<sim::Tick>();
    sim::validate_config(config);
    return config;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad sim config: ") + e.what());
  } catch (const sim::InvalidConfig& e) {
    throw InputError(std::string("bad sim config: ") + e.what());
  }
}

std::vector<workload::NamedTrace> load_traces(const std::string& source) {
  if (source == "canonical") return workload::canonical_suite();
  const fs::path dir(source);
  if (!fs::is_directory(dir)) {
    throw InputError("trace directory " + source + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 12 && name.substr(name.size() - 12) == ".trace.jsonl") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw InputError("no .trace.jsonl files in " + source);
  std::sort(files.begin(), files.end());
  std::vector<workload::NamedTrace> traces;
  for (const auto& file : files) {
    std::string stem = file.filename().string();
    stem.resize(stem.size() - 12);
    traces.push_back(workload::NamedTrace{stem, workload::import_trace(file)});
  }
  return traces;
}

int cmd_gen_traces(const std::string& preset, const std::string& params_file, std::uint64_t seed,
                   const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (!params_file.empty()) {
    const workload::WorkloadParams params = params_from_file(params_file);
    const workload::Trace trace = workload::generate_trace(params, seed);
    const fs::path dest = fs::path(out_dir) / ("custom_" + std::to_string(seed) + ".trace.jsonl");
    workload::export_trace(trace, dest);
    std::cout << dest.string() << "\n";
    return kExitOk;
  }
  if (preset == "canonical") {
    for (const auto& named : workload::canonical_suite()) {
      const fs::path dest = fs::path(out_dir) / (named.name + ".trace.jsonl");
      workload::export_trace(named.trace, dest);
      std::cout << dest.string() << "\n";
    }
    return kExitOk;
  }
  const workload::WorkloadParams params = workload::preset_by_name(preset);  // throws on unknown
  const workload::Trace trace = workload::generate_trace(params, seed);
  const fs::path dest =
      fs::path(out_dir) / (preset + "_" + std::to_string(seed) + ".trace.jsonl");
  workload::export_trace(trace, dest);
  std::cout << dest.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& policy_file, const std::string& baseline,
                 const std::string& traces_source, const std::string& config_file,
                 const std::string& metric_name, const std::string& log_dir) {
  const auto metric = discovery::target_metric_from_string(metric_name);
  if (!metric) throw InputError("unknown target metric: " + metric_name);

  const std::vector<workload::NamedTrace> traces = load_traces(traces_source);
  const sim::SimConfig config = config_file.empty()
                                    ? workload::canonical_sim_config()
                                    : sim_config_from_json(read_json_file(config_file));

  // Build the policy: either the native baseline or a .pol source.
  std::unique_ptr<sim::Policy> policy;
  if (!baseline.empty()) {
    if (baseline != "fifo") throw InputError("unknown baseline: " + baseline + " (try fifo)");
    policy = std::make_unique<policy::NativeFifoPolicy>();
  } else {
    std::ifstream in(policy_file);
    if (!in) throw InputError("cannot open policy file " + policy_file);
    std::string source((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto created = policy::DslPolicy::create(std::move(source));
    if (auto* error = std::get_if<policy::InterpError>(&created)) {
      std::cerr << error->render() << "\n";
      return kExitPolicy;
    }
    policy = std::move(std::get<std::unique_ptr<policy::DslPolicy>>(created));
  }

  json output;
  output["target_metric"] = metric_name;
  output["traces"] = json::array();
  std::vector<double> values;
  for (const auto& named : traces) {
    sim::RunResult result;
    try {
      result = sim::run(named.trace.pipelines, *policy, config);
    } catch (const policy::DslPolicyError& e) {
      std::cerr << "policy failed on trace " << named.name;
      if (e.fault_tick) std::cerr << " at tick " << *e.fault_tick;
      std::cerr << "\n" << e.error().render() << "\n";
      return kExitPolicy;
    }
    const double value = *metric == discovery::TargetMetric::throughput
                             ? result.metrics.throughput
                             : (result.metrics.p99_latency
                                    ? static_cast<double>(*result.metrics.p99_latency)
                                    : std::numeric_limits<double>::infinity());
    values.push_back(value);
    output["traces"].push_back(json{{"name", named.name}, {"metrics", result.metrics}});
    if (!log_dir.empty()) {
      fs::create_directories(log_dir);
      std::ofstream log(fs::path(log_dir) / (named.name + ".assignments.jsonl"));
      for (const auto& record : result.assignment_log) {
        log << json(record).dump() << '\n';
      }
    }
  }
  output["median_score"] = discovery::median(values);
  std::cout << output.dump(2) << "\n";
  return kExitOk;
}

llm::ProviderConfig provider_from_json(const json& j) {
  llm::ProviderConfig provider;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "http_chat") {
    provider.kind = llm::ProviderKind::http_chat;
    provider.endpoint = j.at("endpoint").get<std::string>();
    provider.api_key_env_var = j.at("api_key_env_var").get<std::string>();
  } else if (kind == "scripted") {
    provider.kind = llm::ProviderKind::scripted;
    provider.script_dir = j.at("script_dir").get<std::string>();
  } else {
    throw InputError("provider.kind must be http_chat or scripted");
  }
  provider.model = j.value("model", "");
  provider.timeout_seconds = j.value("timeout_seconds", 60.0);
  provider.max_retries = j.value("max_retries", 3);
  provider.retry_base_seconds = j.value("retry_base_seconds", 1.0);
  provider.price_table.usd_per_mtok_in = j.value("price_usd_per_mtok_in", 0.0);
  provider.price_table.usd_per_mtok_out = j.value("price_usd_per_mtok_out", 0.0);
  return provider;
}

discovery::DiscoveryConfig experiment_from_file(const fs::path& path) {
  const json j = read_json_file(path);
  discovery::DiscoveryConfig config;
  try {
    if (!j.contains("iterations")) throw InputError("config is missing 'iterations'");
    config.iterations = j.at("iterations").get<int>();
    if (config.iterations < 1) throw InputError("iterations must be >= 1");

    if (!j.contains("target_metric")) throw InputError("config is missing 'target_metric'");
    const auto metric = discovery::target_metric_from_string(j.at("target_metric").get<std::string>());
    if (!metric) throw InputError("target_metric must be throughput or p99_latency");
    config.target_metric = *metric;

    if (!j.contains("token_budget")) throw InputError("config is missing 'token_budget'");
    config.token_budget = j.at("token_budget").get<std::int64_t>();

    if (!j.contains("traces")) throw InputError("config is missing 'traces'");
    const auto& jtraces = j.at("traces");
    if (jtraces.contains("preset")) {
      const auto preset = jtraces.at("preset").get<std::string>();
      if (preset != "canonical") throw InputError("traces.preset must be canonical");
      config.traces = workload::canonical_suite();
    } else if (jtraces.contains("dir")) {
      config.traces = load_traces(jtraces.at("dir").get<std::string>());
    } else {
      throw InputError("traces needs either a preset or a dir");
    }

    config.sim_config = j.contains("sim_config") ? sim_config_from_json(j.at("sim_config"))
                                                 : workload::canonical_sim_config();

    if (!j.contains("provider")) throw InputError("config is missing 'provider'");
    config.provider = provider_from_json(j.at("provider"));

    if (j.contains("generation")) {
      const auto& jgen = j.at("generation");
      config.generation.model = jgen.value("model", config.provider.model);
      if (jgen.contains("temperature")) {
        config.generation.temperature = jgen.at("temperature").get<double>();
      }
      if (jgen.contains("reasoning_effort")) {
        config.generation.reasoning_effort = jgen.at("reasoning_effort").get<std::string>();
      }
    } else {
      config.generation.model = config.provider.model;
    }

    config.out_dir = j.value("out_dir", std::string("runs"));
    config.run_id = j.value("run_id", std::string());
  } catch (const json::exception& e) {
    throw InputError("bad experiment config: " + std::string(e.what()));
  }
  return config;
}

int cmd_discover(const std::string& config_file) {
  const discovery::DiscoveryConfig config = experiment_from_file(config_file);
  auto provider = llm::make_provider(config.provider);
  discovery::DiscoveryResult result;
  try {
    result = discovery::run_discovery(config, *provider);
  } catch (const llm::ProviderError& e) {
    std::cerr << "provider error (" << llm::to_string(e.kind) << "): " << e.what() << "\n";
    return kExitProvider;
  } catch (const llm::ScriptExhausted& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  }

  json summary{{"run_dir", result.run_dir.string()},
               {"iterations", result.records.size()},
               {"total_cost_usd", result.ledger.total_cost_usd()},
               {"total_time_seconds", result.ledger.total_time_seconds()}};
  if (result.best) {
    summary["best"] = json{{"iteration", result.best->iteration},
                           {"score", result.best->score},
                           {"improvement_vs_baseline", result.best->improvement_vs_baseline}};
  } else {
    summary["best"] = nullptr;
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_report(const std::string& run_dir, const std::string& csv_file) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "manifest.json")) {
    throw InputError("no manifest.json in " + run_dir);
  }
  const json manifest = read_json_file(dir / "manifest.json");

  std::ifstream records_in(dir / "records.jsonl");
  if (!records_in) throw InputError("no records.jsonl in " + run_dir);
  json trajectory = json::array();
  std::string line;
  int line_no = 0;
  while (std::getline(records_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      throw InputError("records.jsonl line " + std::to_string(line_no) + " is corrupt");
    }
    json point{{"iteration", record.value("iteration", 0)}, {"valid", record.value("valid", false)}};
    if (record.contains("score")) point["score"] = record["score"];
    trajectory.push_back(std::move(point));
  }

  double improvement_pct = 0.0;
  bool has_best = false;
  try {
    const double baseline = manifest.at("baseline_score").get<double>();
    if (!manifest.at("best").is_null()) {
      has_best = true;
      const double best = manifest.at("best").at("score").get<double>();
      const auto metric = manifest.at("config").at("target_metric").get<std::string>();
      improvement_pct = metric == "p99_latency" ? (baseline / best - 1.0) * 100.0
                                                : (best / baseline - 1.0) * 100.0;
    }
  } catch (const json::exception& e) {
    throw InputError("corrupt manifest: " + std::string(e.what()));
  }

  json report{{"run_id", manifest.value("run_id", "")},
              {"baseline_score", manifest.at("baseline_score")},
              {"total_cost_usd", manifest.at("ledger").at("total_cost_usd")},
              {"total_time_seconds", manifest.at("ledger").at("total_time_seconds")},
              {"trajectory", trajectory}};
  report["improvement_pct"] = has_best ? json(improvement_pct) : json(nullptr);
  report["best"] = manifest.at("best");
  std::cout << report.dump(2) << "\n";

  if (!csv_file.empty()) {
    std::ofstream csv(csv_file);
    csv << "iteration,valid,score\n";
    for (const auto& point : trajectory) {
      csv << point.at("iteration").get<int>() << ',' << (point.at("valid").get<bool>() ? 1 : 0)
          << ',';
      if (point.contains("score")) csv << point.at("score").get<double>();
      csv << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic FaaS scheduling simulator with LLM policy discovery"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-traces", "Generate workload trace files");
  std::string gen_preset;
  std::string gen_params;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "traces";
  gen->add_option("--preset", gen_preset, "canonical, interactive, batch, or mixed");
  gen->add_option("--params", gen_params, "workload params JSON file");
  gen->add_option("--seed", gen_seed, "generator seed (ignored for --preset canonical)");
  gen->add_option("--out", gen_out, "output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run one policy over traces");
  std::string sim_policy;
  std::string sim_baseline;
  std::string sim_traces;
  std::string sim_config_file;
  std::string sim_metric = "throughput";
  std::string sim_log_dir;
  simulate->add_option("--policy", sim_policy, "policy .pol file");
  simulate->add_option("--baseline", sim_baseline, "named baseline (fifo)");
  simulate->add_option("--traces", sim_traces, "trace directory or 'canonical'")->required();
  simulate->add_option("--config", sim_config_file, "sim config JSON file");
  simulate->add_option("--target-metric", sim_metric, "throughput or p99_latency");
  simulate->add_option("--log-dir", sim_log_dir, "write per-trace assignment logs here");

  auto* discover = app.add_subcommand("discover", "Run the policy discovery loop");
  std::string discover_config;
  discover->add_option("--config", discover_config, "experiment JSON file")->required();

  auto* report = app.add_subcommand("report", "Summarize a discovery run directory");
  std::string report_run;
  std::string report_csv;
  report->add_option("--run", report_run, "run directory")->required();
  report->add_option("--csv", report_csv, "also write the trajectory as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (gen_preset.empty() == gen_params.empty()) {
        std::cerr << "pass exactly one of --preset or --params\n";
        return kExitInput;
      }
      return cmd_gen_traces(gen_preset, gen_params, gen_seed, gen_out);
    }
    if (simulate->parsed()) {
      if (sim_policy.empty() == sim_baseline.empty()) {
        std::cerr << "pass exactly one of --policy or --baseline\n";
        return kExitInput;
      }
      return cmd_simulate(sim_policy, sim_baseline, sim_traces, sim_config_file, sim_metric,
                          sim_log_dir);
    }
    if (discover->parsed()) {
      return cmd_discover(discover_config);
    }
    if (report->parsed()) {
      return cmd_report(report_run, report_csv);
    }
  } catch (const InputError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const workload::InvalidParams& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const workload::FormatError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const workload::IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const sim::InvalidTrace& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const sim::InvalidConfig& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const discovery::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
