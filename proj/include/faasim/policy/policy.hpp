#pragma once

#include <memory>
#include <string>
#include <variant>

#include "faasim/policy/interp.hpp"
#include "faasim/policy/lang.hpp"
#include "faasim/sim/engine.hpp"

namespace faasim::policy {

// PolicyError specialization that carries the interpreter diagnostic.
class DslPolicyError : public sim::PolicyError {
 public:
  explicit DslPolicyError(InterpError error)
      : sim::PolicyError(error.render()), error_(std::move(error)) {}

  const InterpError& error() const { return error_; }

 private:
  InterpError error_;
};

// Runs a parsed policy program inside the sandboxed interpreter. One
// instance serves one simulation run; state persists across ticks.
class DslPolicy final : public sim::Policy {
 public:
  // Parses and validates; returns the error instead of a policy when the
  // source is rejected.
  static std::variant<std::unique_ptr<DslPolicy>, InterpError> create(
      std::string source_text, std::int64_t max_steps = kDefaultMaxSteps);

  void init() override;
  sim::ScheduleResult schedule(const sim::ScheduleInputs& inputs) override;

  const PolicyProgram& program() const { return program_; }
  std::int64_t max_invocation_steps() const { return max_seen_steps_; }

 private:
  DslPolicy(PolicyProgram program, std::int64_t max_steps);

  PolicyProgram program_;
  std::int64_t max_steps_;
  std::int64_t max_seen_steps_ = 0;
  std::unique_ptr<Interpreter> interp_;
};

// Reference FIFO: enqueue ops at arrival, drop failed pipelines, then fill
// pools in order with ready ops in queue order. Mirrors the shipped FIFO
// policy source exactly; the assignment logs must match.
class NativeFifoPolicy final : public sim::Policy {
 public:
  void init() override;
  sim::ScheduleResult schedule(const sim::ScheduleInputs& inputs) override;

 private:
  struct QueuedOp {
    std::string op_id;
    std::string pipeline_id;
    int cpu_req = 0;
    int mem_req = 0;
  };
  std::vector<QueuedOp> waiting_queue_;
};

// Shipped policy sources (embedded copies of the .pol files).
const std::string& fifo_source();
const std::string& sjf_preempt_source();

}  // namespace faasim::policy
