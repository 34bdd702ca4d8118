#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "faasim/sim/engine.hpp"

namespace faasim::sim {

const char* to_string(WorkloadClass c) {
  return c == WorkloadClass::interactive ? "interactive" : "batch";
}

const char* to_string(OpStatus s) {
  switch (s) {
    case OpStatus::waiting: return "waiting";
    case OpStatus::ready: return "ready";
    case OpStatus::running: return "running";
    case OpStatus::done: return "done";
  }
  return "?";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::failed: return "failed";
    case Outcome::unfinished: return "unfinished";
  }
  return "?";
}

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::oversubscription: return "oversubscription";
    case ViolationKind::not_ready: return "not_ready";
    case ViolationKind::unknown_op: return "unknown_op";
    case ViolationKind::unknown_pool: return "unknown_pool";
    case ViolationKind::duplicate_assignment: return "duplicate_assignment";
    case ViolationKind::suspend_not_running: return "suspend_not_running";
    case ViolationKind::waiting_bound_exceeded: return "waiting_bound_exceeded";
  }
  return "?";
}

Tick critical_path(const PipelineSpec& pipeline) {
  std::map<std::string, int> by_id;
  for (int i = 0; i < static_cast<int>(pipeline.ops.size()); ++i) {
    by_id.emplace(pipeline.ops[i].op_id, i);
  }
  const int n = static_cast<int>(pipeline.ops.size());
  // Iterative DFS over deps; memo < 0 means not yet computed. Callers are
  // expected to have rejected cycles already.
  std::vector<Tick> memo(n, -1);
  Tick best = 0;
  for (int start = 0; start < n; ++start) {
    std::deque<int> stack{start};
    while (!stack.empty()) {
      int i = stack.back();
      if (memo[i] >= 0) {
        stack.pop_back();
        continue;
      }
      bool deps_done = true;
      Tick deepest = 0;
      for (const auto& dep : pipeline.ops[i].deps) {
        auto it = by_id.find(dep);
        if (it == by_id.end()) continue;  // reported by validate_pipelines
        if (memo[it->second] < 0) {
          stack.push_back(it->second);
          deps_done = false;
        } else {
          deepest = std::max(deepest, memo[it->second]);
        }
      }
      if (deps_done) {
        memo[i] = deepest + pipeline.ops[i].duration;
        best = std::max(best, memo[i]);
        stack.pop_back();
      }
    }
  }
  return best;
}

void validate_pipelines(const std::vector<PipelineSpec>& pipelines) {
  std::set<std::string> pipeline_ids;
  std::set<std::string> op_ids;
  for (const auto& p : pipelines) {
    if (p.pipeline_id.empty()) throw InvalidTrace("pipeline with empty id");
    if (!pipeline_ids.insert(p.pipeline_id).second) {
      throw InvalidTrace("duplicate pipeline id: " + p.pipeline_id);
    }
    if (p.arrival_tick < 0) throw InvalidTrace("negative arrival_tick in " + p.pipeline_id);
    if (p.ops.empty()) throw InvalidTrace("pipeline " + p.pipeline_id + " has no ops");

    std::map<std::string, int> local;
    for (int i = 0; i < static_cast<int>(p.ops.size()); ++i) {
      const auto& op = p.ops[i];
      if (op.op_id.empty()) throw InvalidTrace("op with empty id in " + p.pipeline_id);
      if (!op_ids.insert(op.op_id).second) throw InvalidTrace("duplicate op id: " + op.op_id);
      if (op.pipeline_id != p.pipeline_id) {
        throw InvalidTrace("op " + op.op_id + " names pipeline " + op.pipeline_id +
                           " but belongs to " + p.pipeline_id);
      }
      if (op.cpu_req < 1 || op.mem_req < 1) {
        throw InvalidTrace("op " + op.op_id + " has non-positive resource request");
      }
      if (op.duration < 1) throw InvalidTrace("op " + op.op_id + " has duration < 1");
      local.emplace(op.op_id, i);
    }

    // deps exist within the pipeline and form no cycle (Kahn)
    std::vector<int> indegree(p.ops.size(), 0);
    std::vector<std::vector<int>> succ(p.ops.size());
    for (int i = 0; i < static_cast<int>(p.ops.size()); ++i) {
      std::set<std::string> seen;
      for (const auto& dep : p.ops[i].deps) {
        auto it = local.find(dep);
        if (it == local.end()) {
          throw InvalidTrace("op " + p.ops[i].op_id + " depends on unknown op " + dep);
        }
        if (dep == p.ops[i].op_id) {
          throw InvalidTrace("op " + p.ops[i].op_id + " depends on itself");
        }
        if (!seen.insert(dep).second) {
          throw InvalidTrace("op " + p.ops[i].op_id + " lists dep " + dep + " twice");
        }
        succ[it->second].push_back(i);
        ++indegree[i];
      }
    }
    std::deque<int> queue;
    for (int i = 0; i < static_cast<int>(p.ops.size()); ++i) {
      if (indegree[i] == 0) queue.push_back(i);
    }
    std::size_t seen_count = 0;
    while (!queue.empty()) {
      int i = queue.front();
      queue.pop_front();
      ++seen_count;
      for (int s : succ[i]) {
        if (--indegree[s] == 0) queue.push_back(s);
      }
    }
    if (seen_count != p.ops.size()) {
      throw InvalidTrace("pipeline " + p.pipeline_id + " has a dependency cycle");
    }

    if (p.timeout < critical_path(p)) {
      throw InvalidTrace("pipeline " + p.pipeline_id + " timeout below critical path");
    }
  }
}

void validate_config(const SimConfig& config) {
  if (config.pools.empty()) throw InvalidConfig("config has no pools");
  for (int i = 0; i < static_cast<int>(config.pools.size()); ++i) {
    const auto& pool = config.pools[i];
    if (pool.pool_id != i) throw InvalidConfig("pool ids must be contiguous from 0");
    if (pool.cpu_capacity < 1 || pool.mem_capacity < 1) {
      throw InvalidConfig("pool capacities must be >= 1");
    }
  }
  if (config.max_ticks < 1) throw InvalidConfig("max_ticks must be >= 1");
  if (config.waiting_bound < 1) throw InvalidConfig("waiting_bound must be >= 1");
}

}  // namespace faasim::sim
