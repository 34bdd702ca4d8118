#include <sstream>

#include "faasim/discovery/discovery.hpp"
#include "faasim/policy/policy.hpp"

namespace faasim::discovery {

namespace {

constexpr const char* kLanguageReference = R"(## Policy language

A policy is exactly two blocks:

    init { ... }                          # runs once; set up persistent state
    schedule(failures, pipelines) { ... } # runs every tick; emit decisions

Statements: `let x = expr;`, assignment `lvalue = expr;`, `if expr { ... } else { ... }`,
`for x in expr { ... }` (iterates a list, or 0..n-1 when expr is a number), and
expression statements. Comments start with `#`. Values are numbers (64-bit float,
exact integers up to 2^53), booleans, strings, lists `[a, b]`, and records
`{ key: value }`. Lists and records are reference values. `==`/`!=` require equal
types; `<` `<=` `>` `>=` order two numbers or two strings; `and`/`or`/`not` work on
booleans only; `if` conditions must be booleans. Indexing past a list's end,
reading a missing field, dividing by zero, or mixing types in a comparison aborts
the whole simulation with a runtime error, so guard with len() checks.

Builtins:
  state                      persistent record, survives across ticks
  len(list)                  number of elements
  append(list, v)            push v onto list
  remove_at(list, i)         delete element i
  sort_by(list, field, asc)  stable-sorted copy of a list of records
  ready_ops(p)               ready ops of pipeline p (id string or record with pipeline_id)
  num_pools()                number of worker pools
  pool(i)                    {pool_id, cpu_capacity, mem_capacity, cpu_free, mem_free}
  running(i)                 ops running in pool i: {op_id, pipeline_id, elapsed,
                             cpu_req, mem_req, duration_hint, workload_class}
  assign(op_id, pool_id)     place a ready op onto a pool this tick
  suspend(op_id)             preempt a running op (it restarts from zero, becomes ready)
  min(a,b) max(a,b) floor(x) ceil(x)

`schedule` receives `failures` (records {pipeline_id, reason, tick} for pipelines
that just timed out) and `pipelines` (this tick's new arrivals: {pipeline_id,
workload_class, arrival_tick, ops}; each op is {op_id, pipeline_id, cpu_req,
mem_req, duration_hint, deps, status}). Each invocation has a 200000-step budget;
exceeding it aborts the run.)";

constexpr const char* kSimulatorReference = R"(## Simulator

A deterministic tick-based FaaS simulator. Pipelines are DAGs of ops; each op
needs cpu_req cores and mem_req MB for duration_hint consecutive ticks on one
pool. An op is ready when all of its deps are done. Each tick the simulator:
(1) delivers new pipelines, (2) fails pipelines that exceeded their timeout and
reports them via `failures`, (3) calls your schedule block, (4) applies your
suspensions then assignments in order - invalid decisions are skipped and logged
as violations (oversubscription, not_ready, unknown_op, unknown_pool,
duplicate_assignment, suspend_not_running), (5) advances running ops. Pool
`cpu_free`/`mem_free` do NOT change while your schedule block runs; track
capacity you have already claimed this tick yourself. A suspended op loses all
progress and must be re-queued by you or it will never run again.

## Metrics

throughput = completed pipelines per 1000 ticks (higher is better).
p99_latency = 99th-percentile pipeline latency in ticks (lower is better).
A pipeline that exceeds its timeout counts as failed and is gone for good.
Scores are the median of the target metric across the evaluation traces.)";

}  // namespace

std::string system_prompt(const DiscoveryConfig& config) {
  std::ostringstream out;
  out << "You design scheduling policies for a FaaS runtime. Workers are pooled VMs; "
         "interactive queries and long batch pipelines share them, and the scheduler "
         "decides which ready op runs where each tick.\n\n";
  out << kSimulatorReference << "\n\n" << kLanguageReference << "\n\n";
  out << "## Evaluation environment\n\n";
  out << config.sim_config.pools.size() << " pools:";
  for (const auto& pool : config.sim_config.pools) {
    out << " pool " << pool.pool_id << " (" << pool.cpu_capacity << " cpu, "
        << pool.mem_capacity << " MB)";
  }
  out << "; " << config.traces.size() << " traces, up to " << config.sim_config.max_ticks
      << " ticks each.\n\n";
  out << "## Baseline policy (FIFO)\n\n```\n" << policy::fifo_source() << "```\n\n";
  out << "Reply with exactly one policy inside one fenced code block. No other code "
         "blocks.";
  return out.str();
}

std::string user_prompt(const DiscoveryConfig& config) {
  std::ostringstream out;
  out << "Write a scheduling policy that improves " << to_string(config.target_metric)
      << " over the FIFO baseline above. ";
  if (config.target_metric == TargetMetric::throughput) {
    out << "Higher median throughput across the evaluation traces wins. ";
  } else {
    out << "Lower median p99 latency across the evaluation traces wins. ";
  }
  out << "Start from the baseline and change it incrementally; keep every builtin call "
         "exactly as documented. The workload mixes short interactive pipelines with "
         "long heavy-tailed batch pipelines, and pipelines that wait too long time out.";
  return out.str();
}

Context build_initial_context(const DiscoveryConfig& config) {
  Context context;
  context.push_back(ContextEntry{Role::system, system_prompt(config), std::nullopt, false});
  context.push_back(ContextEntry{Role::user, user_prompt(config), std::nullopt, false});
  const std::int64_t tokens = context_tokens(context);
  if (tokens > config.token_budget) {
    throw ConfigError("token_budget " + std::to_string(config.token_budget) +
                      " is below the initial context size of " + std::to_string(tokens) +
                      " tokens");
  }
  return context;
}

}  // namespace faasim::discovery
