#include <fstream>
#include <nlohmann/json.hpp>

#include "faasim/sim/engine.hpp"
#include "faasim/workload/workload.hpp"

namespace faasim::workload {

namespace {

using nlohmann::json;

json pipeline_to_json(const sim::PipelineSpec& pipe) {
  json ops = json::array();
  for (const auto& op : pipe.ops) {
    ops.push_back(json{{"op_id", op.op_id},
                       {"cpu_req", op.cpu_req},
                       {"mem_req", op.mem_req},
                       {"duration", op.duration},
                       {"deps", op.deps}});
  }
  return json{{"pipeline_id", pipe.pipeline_id},
              {"arrival_tick", pipe.arrival_tick},
              {"workload_class", sim::to_string(pipe.workload_class)},
              {"timeout", pipe.timeout},
              {"ops", std::move(ops)}};
}

sim::PipelineSpec pipeline_from_json(const json& j, int line) {
  sim::PipelineSpec pipe;
  try {
    j.at("pipeline_id").get_to(pipe.pipeline_id);
    j.at("arrival_tick").get_to(pipe.arrival_tick);
    j.at("timeout").get_to(pipe.timeout);
    const auto cls = j.at("workload_class").get<std::string>();
    if (cls == "interactive") {
      pipe.workload_class = sim::WorkloadClass::interactive;
    } else if (cls == "batch") {
      pipe.workload_class = sim::WorkloadClass::batch;
    } else {
      throw FormatError(line, "unknown workload_class '" + cls + "'");
    }
    for (const auto& jop : j.at("ops")) {
      sim::OpSpec op;
      jop.at("op_id").get_to(op.op_id);
      op.pipeline_id = pipe.pipeline_id;
      jop.at("cpu_req").get_to(op.cpu_req);
      jop.at("mem_req").get_to(op.mem_req);
      jop.at("duration").get_to(op.duration);
      jop.at("deps").get_to(op.deps);
      pipe.ops.push_back(std::move(op));
    }
  } catch (const json::exception& e) {
    throw FormatError(line, std::string("bad pipeline record: ") + e.what());
  }
  return pipe;
}

}  // namespace

void export_trace(const Trace& trace, const std::filesystem::path& destination) {
  std::ofstream out(destination);
  if (!out) throw IoError("cannot open " + destination.string() + " for writing");
  json header{{"format", "faasim-trace"},
              {"version", 1},
              {"params_fingerprint", trace.params_fingerprint},
              {"seed", trace.seed},
              {"pipeline_count", trace.pipelines.size()}};
  out << header.dump() << '\n';
  for (const auto& pipe : trace.pipelines) {
    out << pipeline_to_json(pipe).dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + destination.string());
}

Trace import_trace(const std::filesystem::path& source) {
  std::ifstream in(source);
  if (!in) throw IoError("cannot open " + source.string());

  Trace trace;
  std::string line_text;
  int line = 0;
  std::size_t expected = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (line_text.empty()) continue;
    json j = json::parse(line_text, nullptr, false);
    if (j.is_discarded()) throw FormatError(line, "not valid JSON");
    if (line == 1) {
      try {
        if (j.at("format").get<std::string>() != "faasim-trace") {
          throw FormatError(line, "not a faasim trace file");
        }
        j.at("params_fingerprint").get_to(trace.params_fingerprint);
        j.at("seed").get_to(trace.seed);
        j.at("pipeline_count").get_to(expected);
      } catch (const json::exception& e) {
        throw FormatError(line, std::string("bad header: ") + e.what());
      }
      continue;
    }
    trace.pipelines.push_back(pipeline_from_json(j, line));
  }
  if (line == 0) throw FormatError(1, "empty file");
  if (trace.pipelines.size() != expected) {
    throw FormatError(line, "expected " + std::to_string(expected) + " pipelines, found " +
                                std::to_string(trace.pipelines.size()));
  }
  for (std::size_t i = 1; i < trace.pipelines.size(); ++i) {
    if (trace.pipelines[i].arrival_tick < trace.pipelines[i - 1].arrival_tick) {
      throw FormatError(line, "pipelines are not sorted by arrival_tick");
    }
  }
  sim::validate_pipelines(trace.pipelines);  // throws InvalidTrace on semantic faults
  return trace;
}

}  // namespace faasim::workload
