#include <algorithm>
#include <set>

#include "faasim/discovery/discovery.hpp"

namespace faasim::discovery {

const char* to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::feedback: return "feedback";
  }
  return "?";
}

std::int64_t context_tokens(const Context& context) {
  std::int64_t total = 0;
  for (const auto& entry : context) total += llm::estimate_tokens(entry.text);
  return total;
}

namespace {

std::string summary_line(int iteration, const std::vector<const ContextEntry*>& entries) {
  // Prefer the feedback entry to classify the iteration.
  for (const ContextEntry* entry : entries) {
    if (entry->role != Role::feedback) continue;
    if (entry->text.rfind("Result: VALID", 0) == 0) {
      const auto pos = entry->text.find("median score: ");
      std::string score = "?";
      if (pos != std::string::npos) {
        const auto end = entry->text.find('\n', pos);
        score = entry->text.substr(pos + 14, end - pos - 14);
      }
      return "(iteration " + std::to_string(iteration) + ": valid, score " + score + ")";
    }
    if (entry->text.rfind("Result: INVALID", 0) == 0) {
      const auto open = entry->text.find('(');
      const auto close = entry->text.find(')');
      std::string kind = "error";
      if (open != std::string::npos && close != std::string::npos && close > open) {
        kind = entry->text.substr(open + 1, close - open - 1);
      }
      return "(iteration " + std::to_string(iteration) + ": invalid, " + kind + ")";
    }
  }
  return "(iteration " + std::to_string(iteration) + ")";
}

}  // namespace

Context compress_context(const Context& context, std::int64_t token_budget,
                         std::optional<int> best_iteration) {
  if (context_tokens(context) <= token_budget) return context;

  // Group entries by iteration; the leading prompt entries have none.
  std::vector<const ContextEntry*> prompts;
  std::map<int, std::vector<const ContextEntry*>> by_iteration;
  for (const auto& entry : context) {
    if (entry.iteration) {
      by_iteration[*entry.iteration].push_back(&entry);
    } else {
      prompts.push_back(&entry);
    }
  }

  std::set<int> verbatim;
  if (best_iteration) verbatim.insert(*best_iteration);
  // the three most recent iterations
  int kept_recent = 0;
  for (auto it = by_iteration.rbegin(); it != by_iteration.rend() && kept_recent < 3; ++it) {
    verbatim.insert(it->first);
    ++kept_recent;
  }

  std::int64_t mandatory_tokens = 0;
  for (const ContextEntry* entry : prompts) mandatory_tokens += llm::estimate_tokens(entry->text);
  for (int iteration : verbatim) {
    for (const ContextEntry* entry : by_iteration[iteration]) {
      mandatory_tokens += llm::estimate_tokens(entry->text);
    }
  }
  if (mandatory_tokens > token_budget) {
    throw BudgetImpossible("the prompts, best iteration, and last three iterations alone need " +
                           std::to_string(mandatory_tokens) + " tokens, over the budget of " +
                           std::to_string(token_budget));
  }

  // Summaries oldest-first; drop from the front while over budget.
  std::vector<std::pair<int, std::string>> summaries;
  std::int64_t summary_tokens = 0;
  for (const auto& [iteration, entries] : by_iteration) {
    if (verbatim.count(iteration) > 0) continue;
    summaries.emplace_back(iteration, summary_line(iteration, entries));
    summary_tokens += llm::estimate_tokens(summaries.back().second);
  }
  std::size_t dropped = 0;
  while (dropped < summaries.size() && mandatory_tokens + summary_tokens > token_budget) {
    summary_tokens -= llm::estimate_tokens(summaries[dropped].second);
    ++dropped;
  }

  Context out;
  for (const ContextEntry* entry : prompts) out.push_back(*entry);
  std::map<int, std::vector<ContextEntry>> rebuilt;
  for (std::size_t i = dropped; i < summaries.size(); ++i) {
    ContextEntry summary;
    summary.role = Role::feedback;
    summary.text = summaries[i].second;
    summary.iteration = summaries[i].first;
    summary.compressed = true;
    rebuilt[summaries[i].first].push_back(std::move(summary));
  }
  for (int iteration : verbatim) {
    for (const ContextEntry* entry : by_iteration[iteration]) {
      rebuilt[iteration].push_back(*entry);
    }
  }
  for (auto& [iteration, entries] : rebuilt) {
    for (auto& entry : entries) out.push_back(std::move(entry));
  }
  return out;
}

double RunLedger::total_cost_usd() const {
  double total = 0.0;
  for (const auto& entry : entries) total += entry.cost_usd;
  return total;
}

double RunLedger::total_time_seconds() const {
  double total = 0.0;
  for (const auto& entry : entries) total += entry.latency_seconds;
  return total;
}

}  // namespace faasim::discovery
