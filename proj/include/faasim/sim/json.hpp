#pragma once

#include <nlohmann/json.hpp>

#include "faasim/sim/types.hpp"

namespace faasim::sim {

inline void to_json(nlohmann::json& j, const SimMetrics& m) {
  j = nlohmann::json{{"throughput", m.throughput},
                     {"completed", m.completed},
                     {"failed", m.failed},
                     {"unfinished", m.unfinished},
                     {"violations", m.violations},
                     {"elapsed_ticks", m.elapsed_ticks}};
  if (m.p99_latency) j["p99_latency"] = *m.p99_latency;
  if (m.median_latency) j["median_latency"] = *m.median_latency;
}

inline void from_json(const nlohmann::json& j, SimMetrics& m) {
  j.at("throughput").get_to(m.throughput);
  j.at("completed").get_to(m.completed);
  j.at("failed").get_to(m.failed);
  j.at("unfinished").get_to(m.unfinished);
  j.at("violations").get_to(m.violations);
  j.at("elapsed_ticks").get_to(m.elapsed_ticks);
  if (j.contains("p99_latency")) m.p99_latency = j.at("p99_latency").get<Tick>();
  if (j.contains("median_latency")) m.median_latency = j.at("median_latency").get<Tick>();
}

inline void to_json(nlohmann::json& j, const AssignmentRecord& r) {
  j = nlohmann::json{{"tick", r.tick}, {"op_id", r.op_id}, {"pool_id", r.pool_id}};
}

inline void to_json(nlohmann::json& j, const ViolationEvent& v) {
  j = nlohmann::json{{"tick", v.tick}, {"kind", to_string(v.kind)}, {"message", v.message}};
  if (v.op_id) j["op_id"] = *v.op_id;
  if (v.pool_id) j["pool_id"] = *v.pool_id;
}

inline void to_json(nlohmann::json& j, const CompletionRecord& r) {
  j = nlohmann::json{{"pipeline_id", r.pipeline_id},
                     {"arrival_tick", r.arrival_tick},
                     {"terminal_tick", r.terminal_tick},
                     {"outcome", to_string(r.outcome)}};
  if (r.latency) j["latency"] = *r.latency;
}

}  // namespace faasim::sim
