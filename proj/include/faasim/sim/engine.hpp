#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "faasim/sim/state.hpp"
#include "faasim/sim/views.hpp"

namespace faasim::sim {

class InvalidTrace : public std::runtime_error {
 public:
  explicit InvalidTrace(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidConfig : public std::runtime_error {
 public:
  explicit InvalidConfig(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by a policy implementation when execution of the policy itself
// fails (interpreter fault or step-budget exhaustion). Aborts the run.
class PolicyError : public std::runtime_error {
 public:
  explicit PolicyError(const std::string& msg) : std::runtime_error(msg) {}

  std::optional<Tick> fault_tick;
};

struct ScheduleResult {
  std::vector<Suspension> suspensions;
  std::vector<Assignment> assignments;
};

struct ScheduleInputs {
  const std::vector<FailureNotice>& failures;
  const std::vector<PipelineArrivalView>& new_pipelines;
  const ExecutorView& executor;
};

class Policy {
 public:
  virtual ~Policy() = default;

  // Called once before the first tick; resets persistent policy state.
  virtual void init() = 0;
  virtual ScheduleResult schedule(const ScheduleInputs& inputs) = 0;
};

// Structural validation shared by init_sim and trace import. Throws
// InvalidTrace on cycles, bad ids, or timeout below the critical path.
void validate_pipelines(const std::vector<PipelineSpec>& pipelines);
void validate_config(const SimConfig& config);

SimState init_sim(std::vector<PipelineSpec> trace, const SimConfig& config);

// Advances the simulation by one tick. Requires clock < max_ticks.
void step(SimState& state, Policy& policy);

// Capacity consumed by assignments already accepted this tick.
struct TickTally {
  std::vector<PoolUsage> extra;  // per pool
  std::set<std::string> assigned_ops;
};

// Verdict helpers, exposed for tests; nullopt means the decision is valid.
std::optional<ViolationEvent> validate_assignment(const SimState& state, const Assignment& a,
                                                  const TickTally& tally);
std::optional<ViolationEvent> validate_suspension(const SimState& state, const Suspension& s);

struct RunResult {
  SimMetrics metrics;
  std::vector<CompletionRecord> completion_log;
  std::vector<ViolationEvent> violation_log;
  std::vector<AssignmentRecord> assignment_log;
};

RunResult run(const std::vector<PipelineSpec>& trace, Policy& policy, const SimConfig& config);

SimMetrics compute_metrics(const std::vector<CompletionRecord>& completion_log,
                           const std::vector<ViolationEvent>& violation_log, Tick elapsed_ticks);

// Executor surface bound to live simulation state.
class StateExecutorView final : public ExecutorView {
 public:
  explicit StateExecutorView(const SimState& state) : state_(state) {}

  int num_pools() const override;
  PoolView pool(int pool_id) const override;
  std::vector<RunningOpView> running(int pool_id) const override;
  std::vector<OpView> ready_ops(std::string_view pipeline_id) const override;

 private:
  const SimState& state_;
};

}  // namespace faasim::sim
