#include <algorithm>

#include "faasim/policy/embedded_policies.hpp"
#include "faasim/policy/policy.hpp"

namespace faasim::policy {

namespace {

Value op_view_value(const sim::OpView& op) {
  ValueRecord fields;
  fields.emplace("op_id", Value::string(op.op_id));
  fields.emplace("pipeline_id", Value::string(op.pipeline_id));
  fields.emplace("cpu_req", Value::number(op.cpu_req));
  fields.emplace("mem_req", Value::number(op.mem_req));
  fields.emplace("duration_hint", Value::number(static_cast<double>(op.duration_hint)));
  fields.emplace("status", Value::string(sim::to_string(op.status)));
  ValueList deps;
  deps.reserve(op.deps.size());
  for (const auto& dep : op.deps) deps.push_back(Value::string(dep));
  fields.emplace("deps", Value::list(std::move(deps)));
  return Value::record(std::move(fields));
}

Value pipeline_view_value(const sim::PipelineArrivalView& pipeline) {
  ValueRecord fields;
  fields.emplace("pipeline_id", Value::string(pipeline.pipeline_id));
  fields.emplace("workload_class", Value::string(sim::to_string(pipeline.workload_class)));
  fields.emplace("arrival_tick", Value::number(static_cast<double>(pipeline.arrival_tick)));
  ValueList ops;
  ops.reserve(pipeline.ops.size());
  for (const auto& op : pipeline.ops) ops.push_back(op_view_value(op));
  fields.emplace("ops", Value::list(std::move(ops)));
  return Value::record(std::move(fields));
}

Value failure_value(const sim::FailureNotice& failure) {
  ValueRecord fields;
  fields.emplace("pipeline_id", Value::string(failure.pipeline_id));
  fields.emplace("reason", Value::string("timeout"));
  fields.emplace("tick", Value::number(static_cast<double>(failure.tick)));
  return Value::record(std::move(fields));
}

class ExecutorHost final : public BuiltinHost {
 public:
  ExecutorHost(const sim::ExecutorView& view, sim::ScheduleResult& sink)
      : view_(view), sink_(sink) {}

  int num_pools() const override { return view_.num_pools(); }

  std::optional<Value> pool(int pool_id) const override {
    if (pool_id < 0 || pool_id >= view_.num_pools()) return std::nullopt;
    const sim::PoolView pool = view_.pool(pool_id);
    ValueRecord fields;
    fields.emplace("pool_id", Value::number(pool.pool_id));
    fields.emplace("cpu_capacity", Value::number(pool.cpu_capacity));
    fields.emplace("mem_capacity", Value::number(pool.mem_capacity));
    fields.emplace("cpu_free", Value::number(pool.cpu_free));
    fields.emplace("mem_free", Value::number(pool.mem_free));
    return Value::record(std::move(fields));
  }

  std::optional<Value> running(int pool_id) const override {
    if (pool_id < 0 || pool_id >= view_.num_pools()) return std::nullopt;
    ValueList out;
    for (const auto& run : view_.running(pool_id)) {
      ValueRecord fields;
      fields.emplace("op_id", Value::string(run.op_id));
      fields.emplace("pipeline_id", Value::string(run.pipeline_id));
      fields.emplace("elapsed", Value::number(static_cast<double>(run.elapsed)));
      fields.emplace("cpu_req", Value::number(run.cpu_req));
      fields.emplace("mem_req", Value::number(run.mem_req));
      fields.emplace("duration_hint", Value::number(static_cast<double>(run.duration_hint)));
      fields.emplace("workload_class", Value::string(sim::to_string(run.workload_class)));
      out.push_back(Value::record(std::move(fields)));
    }
    return Value::list(std::move(out));
  }

  Value ready_ops(const std::string& pipeline_id) const override {
    ValueList out;
    for (const auto& op : view_.ready_ops(pipeline_id)) {
      out.push_back(op_view_value(op));
    }
    return Value::list(std::move(out));
  }

  void emit_assign(std::string op_id, int pool_id) override {
    sink_.assignments.push_back(sim::Assignment{std::move(op_id), pool_id});
  }

  void emit_suspend(std::string op_id) override {
    sink_.suspensions.push_back(sim::Suspension{std::move(op_id)});
  }

 private:
  const sim::ExecutorView& view_;
  sim::ScheduleResult& sink_;
};

}  // namespace

DslPolicy::DslPolicy(PolicyProgram program, std::int64_t max_steps)
    : program_(std::move(program)), max_steps_(max_steps) {}

std::variant<std::unique_ptr<DslPolicy>, InterpError> DslPolicy::create(std::string source_text,
                                                                        std::int64_t max_steps) {
  ParseResult parsed = parse(source_text);
  if (auto* error = std::get_if<InterpError>(&parsed)) return *error;
  PolicyProgram program = std::move(std::get<PolicyProgram>(parsed));
  if (auto error = validate_program(program)) return *error;
  return std::unique_ptr<DslPolicy>(new DslPolicy(std::move(program), max_steps));
}

void DslPolicy::init() {
  interp_ = std::make_unique<Interpreter>(program_, max_steps_);
  try {
    interp_->run_init();
  } catch (const InterpFault& fault) {
    throw DslPolicyError(fault.error);
  }
  max_seen_steps_ = std::max(max_seen_steps_, interp_->last_invocation_steps());
}

sim::ScheduleResult DslPolicy::schedule(const sim::ScheduleInputs& inputs) {
  if (!interp_) {
    throw sim::PolicyError("policy used before init()");
  }
  ValueList failures;
  failures.reserve(inputs.failures.size());
  for (const auto& failure : inputs.failures) failures.push_back(failure_value(failure));
  ValueList pipelines;
  pipelines.reserve(inputs.new_pipelines.size());
  for (const auto& pipeline : inputs.new_pipelines) {
    pipelines.push_back(pipeline_view_value(pipeline));
  }

  sim::ScheduleResult result;
  ExecutorHost host(inputs.executor, result);
  try {
    interp_->run_schedule(Value::list(std::move(failures)), Value::list(std::move(pipelines)),
                          host);
  } catch (const InterpFault& fault) {
    throw DslPolicyError(fault.error);
  }
  max_seen_steps_ = std::max(max_seen_steps_, interp_->last_invocation_steps());
  return result;
}

const std::string& fifo_source() {
  static const std::string source = embedded::kFifoSource;
  return source;
}

const std::string& sjf_preempt_source() {
  static const std::string source = embedded::kSjfPreemptSource;
  return source;
}

}  // namespace faasim::policy
