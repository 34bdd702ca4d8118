#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "faasim/sim/types.hpp"

namespace faasim::workload {

using sim::Tick;

struct IntRange {
  std::int64_t min = 1;
  std::int64_t max = 1;

  friend bool operator==(const IntRange&, const IntRange&) = default;
};

// Per-class duration/resource model. Durations are lognormal(mu, sigma)
// ticks, rounded up to >= 1.
struct ClassParams {
  double duration_log_mu = 0.0;
  double duration_log_sigma = 0.0;
  IntRange cpu_range{1, 1};
  IntRange mem_range{1, 1};

  friend bool operator==(const ClassParams&, const ClassParams&) = default;
};

struct WorkloadParams {
  double arrival_rate = 0.1;  // mean pipeline arrivals per tick
  Tick horizon = 1000;        // arrivals occur in (0, horizon]
  double interactive_fraction = 0.5;
  IntRange ops_range{1, 4};
  IntRange layer_width_range{1, 2};
  ClassParams interactive;
  ClassParams batch;
  double timeout_factor = 3.0;  // timeout = ceil(factor * critical path)

  friend bool operator==(const WorkloadParams&, const WorkloadParams&) = default;
};

struct Trace {
  std::string params_fingerprint;
  std::uint64_t seed = 0;
  std::vector<sim::PipelineSpec> pipelines;  // sorted by arrival_tick

  friend bool operator==(const Trace&, const Trace&) = default;
};

class InvalidParams : public std::runtime_error {
 public:
  explicit InvalidParams(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class FormatError : public std::runtime_error {
 public:
  FormatError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}

  int line = 0;
};

// FNV-1a over a canonical text rendering of the params.
std::string params_fingerprint(const WorkloadParams& params);

// Pure function of (params, seed); see docs/policy_language.md for the
// normative draw order.
Trace generate_trace(const WorkloadParams& params, std::uint64_t seed);

struct NamedTrace {
  std::string name;
  Trace trace;
};

// The three built-in parameter presets.
WorkloadParams preset_interactive_heavy();
WorkloadParams preset_batch_heavy();
WorkloadParams preset_mixed_heavy_tailed();
WorkloadParams preset_by_name(const std::string& name);  // throws InvalidParams
std::vector<std::string> preset_names();

// Seeds used to instantiate each preset twice.
inline constexpr std::uint64_t kCanonicalSeedA = 11;
inline constexpr std::uint64_t kCanonicalSeedB = 12;

// The standard six-trace evaluation environment: each preset with both
// canonical seeds, in preset order.
std::vector<NamedTrace> canonical_suite();

// Pool/tick configuration the canonical suite is evaluated under.
sim::SimConfig canonical_sim_config();

void export_trace(const Trace& trace, const std::filesystem::path& destination);
Trace import_trace(const std::filesystem::path& source);

}  // namespace faasim::workload
