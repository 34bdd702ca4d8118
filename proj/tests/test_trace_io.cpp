#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "faasim/sim/engine.hpp"
#include "faasim/workload/workload.hpp"

using namespace faasim;
using namespace faasim::workload;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "faasim_trace_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("export/import round-trips deeply") {
  const Trace trace = generate_trace(preset_mixed_heavy_tailed(), 11);
  const fs::path file = scratch_dir() / "roundtrip.trace.jsonl";
  export_trace(trace, file);
  const Trace back = import_trace(file);
  CHECK(back == trace);
}

TEST_CASE("export is byte-stable") {
  const Trace trace = generate_trace(preset_batch_heavy(), 12);
  const fs::path a = scratch_dir() / "bytes_a.trace.jsonl";
  const fs::path b = scratch_dir() / "bytes_b.trace.jsonl";
  export_trace(trace, a);
  export_trace(trace, b);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("truncated file fails with a line number") {
  const Trace trace = generate_trace(preset_interactive_heavy(), 11);
  const fs::path file = scratch_dir() / "truncated.trace.jsonl";
  export_trace(trace, file);
  std::string text = slurp(file);
  text.resize(text.size() * 2 / 3);  // cut mid-record
  {
    std::ofstream out(file);
    out << text;
  }
  try {
    import_trace(file);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line > 1);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("non-json line fails with its line number") {
  const fs::path file = scratch_dir() / "garbage.trace.jsonl";
  {
    std::ofstream out(file);
    out << R"({"format":"faasim-trace","version":1,"params_fingerprint":"x","seed":1,"pipeline_count":1})"
        << "\n";
    out << "not json\n";
  }
  try {
    import_trace(file);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("cyclic deps in the file fail trace validation on import") {
  const fs::path file = scratch_dir() / "cyclic.trace.jsonl";
  {
    std::ofstream out(file);
    out << R"({"format":"faasim-trace","version":1,"params_fingerprint":"x","seed":1,"pipeline_count":1})"
        << "\n";
    out << R"({"pipeline_id":"p0","arrival_tick":0,"workload_class":"batch","timeout":10,"ops":[)"
        << R"({"op_id":"p0.o0","cpu_req":1,"mem_req":1,"duration":1,"deps":["p0.o1"]},)"
        << R"({"op_id":"p0.o1","cpu_req":1,"mem_req":1,"duration":1,"deps":["p0.o0"]}]})"
        << "\n";
  }
  CHECK_THROWS_AS(import_trace(file), sim::InvalidTrace);
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(import_trace(scratch_dir() / "does_not_exist.trace.jsonl"), IoError);
}

TEST_CASE("wrong header format is rejected") {
  const fs::path file = scratch_dir() / "badheader.trace.jsonl";
  {
    std::ofstream out(file);
    out << R"({"format":"something-else","version":1})" << "\n";
  }
  CHECK_THROWS_AS(import_trace(file), FormatError);
}
