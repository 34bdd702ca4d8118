#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "faasim/policy/lang.hpp"
#include "faasim/policy/value.hpp"

namespace faasim::policy {

// Interpreter steps allowed per init/schedule invocation.
inline constexpr std::int64_t kDefaultMaxSteps = 200000;

// Executor access plus decision sink for one schedule invocation. The
// interpreter has no other way to observe or affect the world.
class BuiltinHost {
 public:
  virtual ~BuiltinHost() = default;

  virtual int num_pools() const = 0;
  virtual std::optional<Value> pool(int pool_id) const = 0;
  virtual std::optional<Value> running(int pool_id) const = 0;
  virtual Value ready_ops(const std::string& pipeline_id) const = 0;
  virtual void emit_assign(std::string op_id, int pool_id) = 0;
  virtual void emit_suspend(std::string op_id) = 0;
};

// Thrown for runtime and budget faults; parse/static problems are reported
// by parse()/validate_program() instead.
struct InterpFault {
  InterpError error;
};

// One interpreter serves one simulation run; `state` persists across ticks.
class Interpreter {
 public:
  explicit Interpreter(const PolicyProgram& program, std::int64_t max_steps = kDefaultMaxSteps);

  void run_init();
  void run_schedule(const Value& failures, const Value& pipelines, BuiltinHost& host);

  Value& state() { return state_; }
  std::int64_t last_invocation_steps() const { return steps_; }

 private:
  friend class Execution;

  const PolicyProgram& program_;
  std::int64_t max_steps_;
  std::int64_t steps_ = 0;
  Value state_ = Value::record();
};

}  // namespace faasim::policy
