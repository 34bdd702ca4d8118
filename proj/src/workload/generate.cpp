#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "faasim/sim/engine.hpp"
#include "faasim/workload/rng.hpp"
#include "faasim/workload/workload.hpp"

namespace faasim::workload {

namespace {

void check_range(const IntRange& r, std::int64_t floor, const char* name) {
  if (r.min > r.max) throw InvalidParams(std::string(name) + ": min > max");
  if (r.min < floor) {
    throw InvalidParams(std::string(name) + ": min below " + std::to_string(floor));
  }
}

void validate_params(const WorkloadParams& p) {
  if (!(p.arrival_rate > 0.0)) throw InvalidParams("arrival_rate must be > 0");
  if (p.horizon < 1) throw InvalidParams("horizon must be >= 1");
  if (p.interactive_fraction < 0.0 || p.interactive_fraction > 1.0) {
    throw InvalidParams("interactive_fraction must be in [0,1]");
  }
  check_range(p.ops_range, 1, "ops_range");
  check_range(p.layer_width_range, 1, "layer_width_range");
  for (const auto* c : {&p.interactive, &p.batch}) {
    if (c->duration_log_sigma < 0.0) throw InvalidParams("duration sigma must be >= 0");
    check_range(c->cpu_range, 1, "cpu_range");
    check_range(c->mem_range, 1, "mem_range");
  }
  if (p.timeout_factor < 1.0) throw InvalidParams("timeout_factor must be >= 1");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string class_text(const ClassParams& c) {
  return fmt_double(c.duration_log_mu) + "," + fmt_double(c.duration_log_sigma) + ",cpu" +
         std::to_string(c.cpu_range.min) + ".." + std::to_string(c.cpu_range.max) + ",mem" +
         std::to_string(c.mem_range.min) + ".." + std::to_string(c.mem_range.max);
}

}  // namespace

std::string params_fingerprint(const WorkloadParams& p) {
  const std::string text = "v1|rate=" + fmt_double(p.arrival_rate) +
                           "|horizon=" + std::to_string(p.horizon) +
                           "|ifrac=" + fmt_double(p.interactive_fraction) +
                           "|ops=" + std::to_string(p.ops_range.min) + ".." +
                           std::to_string(p.ops_range.max) +
                           "|width=" + std::to_string(p.layer_width_range.min) + ".." +
                           std::to_string(p.layer_width_range.max) + "|int=" +
                           class_text(p.interactive) + "|bat=" + class_text(p.batch) +
                           "|tf=" + fmt_double(p.timeout_factor);
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

Trace generate_trace(const WorkloadParams& params, std::uint64_t seed) {
  validate_params(params);
  Xoshiro256pp rng(seed);

  Trace trace;
  trace.params_fingerprint = params_fingerprint(params);
  trace.seed = seed;

  // Draw order is normative: (1) all arrival gaps, then per pipeline
  // (2) class, (3) op count, (4) layer widths, (5) deps per op,
  // (6) durations per op, (7) cpu+mem per op.
  std::vector<Tick> arrivals;
  Tick t = 0;
  for (;;) {
    const double u = rng.uniform();
    auto gap = static_cast<Tick>(std::ceil(-std::log(1.0 - u) / params.arrival_rate));
    if (gap < 1) gap = 1;
    t += gap;
    if (t > params.horizon) break;
    arrivals.push_back(t);
  }

  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    sim::PipelineSpec pipe;
    pipe.pipeline_id = "p" + std::to_string(k);
    pipe.arrival_tick = arrivals[k];

    const bool interactive = rng.uniform() < params.interactive_fraction;
    pipe.workload_class =
        interactive ? sim::WorkloadClass::interactive : sim::WorkloadClass::batch;
    const ClassParams& cls = interactive ? params.interactive : params.batch;

    const auto op_count = rng.uniform_int(params.ops_range.min, params.ops_range.max);

    // Layer widths; each draw consumes one uniform even when clamped.
    std::vector<int> widths;
    std::int64_t remaining = op_count;
    while (remaining > 0) {
      auto w = rng.uniform_int(params.layer_width_range.min, params.layer_width_range.max);
      if (w > remaining) w = remaining;
      widths.push_back(static_cast<int>(w));
      remaining -= w;
    }

    int next_op = 0;
    std::vector<std::vector<int>> layers;
    for (int w : widths) {
      std::vector<int> layer(w);
      std::iota(layer.begin(), layer.end(), next_op);
      next_op += w;
      layers.push_back(std::move(layer));
    }

    pipe.ops.resize(op_count);
    for (int i = 0; i < op_count; ++i) {
      pipe.ops[i].op_id = pipe.pipeline_id + ".o" + std::to_string(i);
      pipe.ops[i].pipeline_id = pipe.pipeline_id;
    }

    // Every non-first-layer op depends on >= 1 op of the previous layer,
    // chosen by a partial Fisher-Yates over that layer.
    for (std::size_t layer_idx = 1; layer_idx < layers.size(); ++layer_idx) {
      const auto& prev = layers[layer_idx - 1];
      const auto prev_w = static_cast<std::int64_t>(prev.size());
      for (int op_idx : layers[layer_idx]) {
        const auto dep_count = rng.uniform_int(1, prev_w);
        std::vector<int> pick(prev.begin(), prev.end());
        for (std::int64_t j = 0; j < dep_count; ++j) {
          const auto swap_with = rng.uniform_int(j, prev_w - 1);
          std::swap(pick[j], pick[swap_with]);
        }
        std::vector<int> chosen(pick.begin(), pick.begin() + dep_count);
        std::sort(chosen.begin(), chosen.end());
        for (int dep : chosen) pipe.ops[op_idx].deps.push_back(pipe.ops[dep].op_id);
      }
    }

    for (auto& op : pipe.ops) {
      const double z = rng.normal();
      auto dur = static_cast<Tick>(
          std::ceil(std::exp(cls.duration_log_mu + cls.duration_log_sigma * z)));
      op.duration = std::max<Tick>(1, dur);
    }
    for (auto& op : pipe.ops) {
      op.cpu_req = static_cast<int>(rng.uniform_int(cls.cpu_range.min, cls.cpu_range.max));
      op.mem_req = static_cast<int>(rng.uniform_int(cls.mem_range.min, cls.mem_range.max));
    }

    pipe.timeout =
        static_cast<Tick>(std::ceil(params.timeout_factor * sim::critical_path(pipe)));
    trace.pipelines.push_back(std::move(pipe));
  }

  return trace;
}

WorkloadParams preset_interactive_heavy() {
  WorkloadParams p;
  p.arrival_rate = 0.07;
  p.horizon = 2000;
  p.interactive_fraction = 0.9;
  p.ops_range = {2, 5};
  p.layer_width_range = {1, 2};
  p.interactive = {1.0, 0.5, {1, 2}, {256, 1024}};
  p.batch = {2.6, 0.7, {2, 4}, {512, 2048}};
  p.timeout_factor = 12.0;
  return p;
}

WorkloadParams preset_batch_heavy() {
  WorkloadParams p;
  p.arrival_rate = 0.015;
  p.horizon = 2000;
  p.interactive_fraction = 0.15;
  p.ops_range = {3, 8};
  p.layer_width_range = {1, 3};
  p.interactive = {1.0, 0.5, {1, 2}, {256, 1024}};
  p.batch = {3.0, 0.8, {2, 4}, {512, 3072}};
  p.timeout_factor = 12.0;
  return p;
}

WorkloadParams preset_mixed_heavy_tailed() {
  WorkloadParams p;
  p.arrival_rate = 0.05;
  p.horizon = 2000;
  p.interactive_fraction = 0.8;
  p.ops_range = {2, 5};
  p.layer_width_range = {1, 2};
  p.interactive = {1.0, 0.6, {1, 2}, {256, 1024}};
  p.batch = {3.2, 1.1, {4, 8}, {1024, 6144}};
  p.timeout_factor = 5.0;
  return p;
}

std::vector<std::string> preset_names() { return {"interactive", "batch", "mixed"}; }

WorkloadParams preset_by_name(const std::string& name) {
  if (name == "interactive") return preset_interactive_heavy();
  if (name == "batch") return preset_batch_heavy();
  if (name == "mixed") return preset_mixed_heavy_tailed();
  throw InvalidParams("unknown preset: " + name + " (expected interactive, batch, or mixed)");
}

std::vector<NamedTrace> canonical_suite() {
  std::vector<NamedTrace> suite;
  for (const auto& name : preset_names()) {
    const WorkloadParams params = preset_by_name(name);
    for (std::uint64_t seed : {kCanonicalSeedA, kCanonicalSeedB}) {
      suite.push_back(
          NamedTrace{name + "_" + std::to_string(seed), generate_trace(params, seed)});
    }
  }
  return suite;
}

sim::SimConfig canonical_sim_config() {
  sim::SimConfig config;
  config.pools = {{0, 8, 8192}, {1, 8, 8192}};
  config.max_ticks = 6000;
  config.waiting_bound = 150;
  return config;
}

}  // namespace faasim::workload
