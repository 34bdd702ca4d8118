#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "faasim/discovery/discovery.hpp"

namespace faasim::discovery {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string opt_tick(const std::optional<sim::Tick>& t) {
  return t ? std::to_string(*t) : "-";
}

// ±2 lines of source around the error line, with a column marker.
std::string snippet(const std::string& source, int line, int column) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : source) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  lines.push_back(current);
  if (line < 1 || line > static_cast<int>(lines.size())) return {};

  std::ostringstream out;
  const int first = std::max(1, line - 2);
  const int last = std::min(static_cast<int>(lines.size()), line + 2);
  for (int i = first; i <= last; ++i) {
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "%4d | ", i);
    out << prefix << lines[static_cast<std::size_t>(i - 1)] << "\n";
    if (i == line && column > 0) {
      out << "       " << std::string(static_cast<std::size_t>(column - 1), ' ') << "^\n";
    }
  }
  return out.str();
}

std::string invalid_feedback(const IterationRecord& record) {
  const EvalError& fail = *record.error;
  std::ostringstream out;
  out << "Result: INVALID (" << policy::to_string(fail.error.kind) << " error)\n";
  if (fail.error.line > 0) {
    out << "line " << fail.error.line << ", column " << fail.error.column << ": "
        << fail.error.message << "\n";
  } else {
    out << fail.error.message << "\n";
  }
  if (fail.trace_index >= 0) {
    out << "occurred on trace " << fail.trace_index;
    if (fail.tick) out << " at tick " << *fail.tick;
    out << "\n";
  }
  const std::string context = snippet(record.policy_source, fail.error.line, fail.error.column);
  if (!context.empty()) out << context;
  if (!fail.error.hint.empty()) out << "hint: " << fail.error.hint << "\n";
  return out.str();
}

std::string valid_feedback(const IterationRecord& record, std::optional<double> best_so_far,
                           double baseline_score) {
  std::ostringstream out;
  out << "Result: VALID\n";
  out << "trace  throughput  p99_latency  median_latency  completed  failed  unfinished  "
         "violations\n";
  for (std::size_t i = 0; i < record.per_trace_metrics.size(); ++i) {
    const auto& m = record.per_trace_metrics[i];
    char row[160];
    std::snprintf(row, sizeof(row), "%-6zu %-11.2f %-12s %-15s %-10lld %-7lld %-11lld %lld", i,
                  m.throughput, opt_tick(m.p99_latency).c_str(), opt_tick(m.median_latency).c_str(),
                  static_cast<long long>(m.completed), static_cast<long long>(m.failed),
                  static_cast<long long>(m.unfinished), static_cast<long long>(m.violations));
    out << row << "\n";
  }
  out << "median score: " << fmt(*record.score) << "\n";
  if (best_so_far) {
    const double delta = *record.score - *best_so_far;
    out << "delta vs best so far: " << (delta >= 0 ? "+" : "") << fmt(delta) << " (best was "
        << fmt(*best_so_far) << ")\n";
  } else {
    out << "delta vs best so far: n/a (first valid policy)\n";
  }
  const double baseline_delta = *record.score - baseline_score;
  out << "delta vs FIFO baseline: " << (baseline_delta >= 0 ? "+" : "") << fmt(baseline_delta)
      << " (baseline " << fmt(baseline_score) << ")\n";

  if (!record.violation_kind_counts.empty()) {
    std::vector<std::pair<std::string, std::int64_t>> kinds(record.violation_kind_counts.begin(),
                                                            record.violation_kind_counts.end());
    std::stable_sort(kinds.begin(), kinds.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out << "top violation kinds:";
    for (std::size_t i = 0; i < kinds.size() && i < 3; ++i) {
      out << (i == 0 ? " " : ", ") << kinds[i].first << " x" << kinds[i].second;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string synthesize_feedback(const IterationRecord& record, std::optional<double> best_so_far,
                                double baseline_score) {
  if (!record.valid) return invalid_feedback(record);
  return valid_feedback(record, best_so_far, baseline_score);
}

}  // namespace faasim::discovery
