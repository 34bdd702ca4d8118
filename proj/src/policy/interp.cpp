#include <algorithm>
#include <cmath>

#include "faasim/policy/builtins.hpp"
#include "faasim/policy/interp.hpp"

namespace faasim::policy {

namespace {

using namespace ast;

constexpr int kMaxWalkDepth = 2048;

[[noreturn]] void fault(ErrorKind kind, Span span, std::string message, std::string hint = {}) {
  throw InterpFault{InterpError{kind, std::move(message), span.line, span.column, std::move(hint)}};
}

[[noreturn]] void runtime_fault(Span span, std::string message, std::string hint = {}) {
  fault(ErrorKind::runtime, span, std::move(message), std::move(hint));
}

// Depth-guarded reachability; prevents stack exhaustion on adversarially
// nested values.
bool reaches_guarded(const Value& v, const void* container, Span span, int depth = 0) {
  if (depth > kMaxWalkDepth) {
    runtime_fault(span, "value is too deeply nested", "flatten the structure");
  }
  if (container == nullptr) return false;
  if (v.container_id() == container) return true;
  if (v.is_list()) {
    for (const auto& item : v.as_list()) {
      if (reaches_guarded(item, container, span, depth + 1)) return true;
    }
  } else if (v.is_record()) {
    for (const auto& [key, item] : v.as_record()) {
      if (reaches_guarded(item, container, span, depth + 1)) return true;
    }
  }
  return false;
}

bool equal_guarded(const Value& a, const Value& b, Span span, int depth = 0) {
  if (depth > kMaxWalkDepth) {
    runtime_fault(span, "value is too deeply nested", "flatten the structure");
  }
  if (a.type() != b.type()) return false;
  switch (a.type()) {
    case ValueType::unit: return true;
    case ValueType::number: return a.as_number() == b.as_number();
    case ValueType::boolean: return a.as_boolean() == b.as_boolean();
    case ValueType::string: return a.as_string() == b.as_string();
    case ValueType::list: {
      const auto& la = a.as_list();
      const auto& lb = b.as_list();
      if (la.size() != lb.size()) return false;
      for (std::size_t i = 0; i < la.size(); ++i) {
        if (!equal_guarded(la[i], lb[i], span, depth + 1)) return false;
      }
      return true;
    }
    case ValueType::record: {
      const auto& ra = a.as_record();
      const auto& rb = b.as_record();
      if (ra.size() != rb.size()) return false;
      auto ia = ra.begin();
      auto ib = rb.begin();
      for (; ia != ra.end(); ++ia, ++ib) {
        if (ia->first != ib->first || !equal_guarded(ia->second, ib->second, span, depth + 1)) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

}  // namespace

// One init or schedule invocation: scope stack, step budget, emissions.
class Execution {
 public:
  Execution(Interpreter& interp, BuiltinHost* host) : interp_(interp), host_(host) {
    interp_.steps_ = 0;
  }

  void run_block_with_scope(const Block& block, std::vector<std::pair<std::string, Value>> params) {
    scopes_.clear();
    scopes_.emplace_back();
    scopes_.back().emplace_back("state", interp_.state_);
    for (auto& [name, value] : params) {
      scopes_.back().emplace_back(name, std::move(value));
    }
    exec_block(block);
  }

 private:
  using Scope = std::vector<std::pair<std::string, Value>>;

  void tick(Span span, std::int64_t cost = 1) {
    interp_.steps_ += cost;
    if (interp_.steps_ > interp_.max_steps_) {
      fault(ErrorKind::budget, span,
            "step budget exceeded (" + std::to_string(interp_.max_steps_) + " steps)",
            "the policy does too much work in one invocation; reduce nested scans");
    }
  }

  Value* find_var(const std::string& name) {
    for (auto scope = scopes_.rbegin(); scope != scopes_.rend(); ++scope) {
      for (auto slot = scope->rbegin(); slot != scope->rend(); ++slot) {
        if (slot->first == name) return &slot->second;
      }
    }
    return nullptr;
  }

  void exec_block(const Block& block) {
    scopes_.emplace_back();
    for (const auto& stmt : block) exec_stmt(*stmt);
    scopes_.pop_back();
  }

  void exec_stmt(const Stmt& stmt) {
    tick(stmt.span);
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, LetStmt>) {
            Value value = eval(*node.value);
            scopes_.back().emplace_back(node.name, std::move(value));
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            Value value = eval(*node.value);
            assign_to(*node.target, std::move(value));
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            const Value cond = eval(*node.condition);
            if (!cond.is_boolean()) {
              runtime_fault(node.condition->span,
                            "if condition must be a boolean, got " + type_name(cond),
                            "use a comparison such as x > 0");
            }
            if (cond.as_boolean()) {
              exec_block(node.then_block);
            } else if (node.has_else) {
              exec_block(node.else_block);
            }
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            exec_for(node, stmt.span);
          } else if constexpr (std::is_same_v<T, ExprStmt>) {
            eval(*node.expr);
          }
        },
        stmt.node);
  }

  void exec_for(const ForStmt& loop, Span span) {
    const Value iterable = eval(*loop.iterable);
    std::vector<Value> items;
    if (iterable.is_list()) {
      // Iterate a snapshot so the body may mutate the source list.
      items = iterable.as_list();
      tick(span, static_cast<std::int64_t>(items.size()));
    } else if (iterable.is_number()) {
      const double n = iterable.as_number();
      if (n < 0 || n != std::floor(n)) {
        runtime_fault(loop.iterable->span,
                      "for over a number requires a non-negative integer, got " + iterable.repr());
      }
      if (n > 1e9) {
        runtime_fault(loop.iterable->span, "for range is too large: " + iterable.repr());
      }
      items.reserve(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        items.push_back(Value::number(static_cast<double>(i)));
      }
      tick(span, static_cast<std::int64_t>(n));
    } else {
      runtime_fault(loop.iterable->span,
                    "for expects a list or a number, got " + type_name(iterable),
                    "for x in some_list { ... } or for i in num_pools() { ... }");
    }
    for (auto& item : items) {
      tick(span);
      scopes_.emplace_back();
      scopes_.back().emplace_back(loop.var, std::move(item));
      for (const auto& stmt : loop.body) exec_stmt(*stmt);
      scopes_.pop_back();
    }
  }

  static std::string type_name(const Value& v) { return to_string(v.type()); }

  void assign_to(const Expr& target, Value value) {
    if (const auto* ident = std::get_if<Ident>(&target.node)) {
      Value* slot = find_var(ident->name);
      if (slot == nullptr) {
        runtime_fault(target.span, "assignment to undefined variable '" + ident->name + "'");
      }
      *slot = std::move(value);
      return;
    }
    if (const auto* member = std::get_if<Member>(&target.node)) {
      Value base = eval(*member->base);
      if (!base.is_record()) {
        runtime_fault(target.span, "cannot set field '" + member->field + "' on a " +
                                       type_name(base));
      }
      guard_cycle(value, base, target.span);
      base.as_record()[member->field] = std::move(value);  // upsert
      return;
    }
    if (const auto* index = std::get_if<Index>(&target.node)) {
      Value base = eval(*index->base);
      const Value key = eval(*index->index);
      if (base.is_list()) {
        auto& list = base.as_list();
        const std::size_t i = list_index(key, list.size(), index->index->span);
        guard_cycle(value, base, target.span);
        list[i] = std::move(value);
        return;
      }
      if (base.is_record()) {
        if (!key.is_string()) {
          runtime_fault(index->index->span, "record index must be a string");
        }
        guard_cycle(value, base, target.span);
        base.as_record()[key.as_string()] = std::move(value);
        return;
      }
      runtime_fault(target.span, "cannot index into a " + type_name(base));
    }
    runtime_fault(target.span, "left side of '=' is not assignable");
  }

  void guard_cycle(const Value& value, const Value& target_container, Span span) {
    if (!value.is_list() && !value.is_record()) return;
    if (reaches_guarded(value, target_container.container_id(), span)) {
      runtime_fault(span, "assignment would create a cyclic structure",
                    "copy the data into a fresh list or record instead");
    }
  }

  std::size_t list_index(const Value& key, std::size_t size, Span span) {
    if (!key.is_number()) {
      runtime_fault(span, "list index must be a number, got " + type_name(key));
    }
    const double raw = key.as_number();
    if (raw != std::floor(raw)) {
      runtime_fault(span, "list index must be an integer, got " + key.repr());
    }
    if (raw < 0 || raw >= static_cast<double>(size)) {
      runtime_fault(span, "list index " + key.repr() + " out of range for length " +
                              std::to_string(size));
    }
    return static_cast<std::size_t>(raw);
  }

  Value eval(const Expr& expr) {
    tick(expr.span);
    return std::visit(
        [&](const auto& node) -> Value {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, NumberLit>) {
            return Value::number(node.value);
          } else if constexpr (std::is_same_v<T, BoolLit>) {
            return Value::boolean(node.value);
          } else if constexpr (std::is_same_v<T, StringLit>) {
            return Value::string(node.value);
          } else if constexpr (std::is_same_v<T, Ident>) {
            Value* slot = find_var(node.name);
            if (slot == nullptr) {
              runtime_fault(expr.span, "use of undefined variable '" + node.name + "'");
            }
            return *slot;
          } else if constexpr (std::is_same_v<T, ListLit>) {
            ValueList items;
            items.reserve(node.items.size());
            for (const auto& item : node.items) items.push_back(eval(*item));
            return Value::list(std::move(items));
          } else if constexpr (std::is_same_v<T, RecordLit>) {
            ValueRecord fields;
            for (const auto& field : node.fields) fields.emplace(field.key, eval(*field.value));
            return Value::record(std::move(fields));
          } else if constexpr (std::is_same_v<T, Unary>) {
            return eval_unary(node, expr.span);
          } else if constexpr (std::is_same_v<T, Binary>) {
            return eval_binary(node, expr.span);
          } else if constexpr (std::is_same_v<T, Call>) {
            return eval_call(node, expr.span);
          } else if constexpr (std::is_same_v<T, Member>) {
            const Value base = eval(*node.base);
            if (!base.is_record()) {
              runtime_fault(expr.span,
                            "cannot read field '" + node.field + "' of a " + type_name(base));
            }
            const auto& record = base.as_record();
            auto it = record.find(node.field);
            if (it == record.end()) {
              runtime_fault(expr.span, "record has no field '" + node.field + "'");
            }
            return it->second;
          } else if constexpr (std::is_same_v<T, Index>) {
            const Value base = eval(*node.base);
            const Value key = eval(*node.index);
            if (base.is_list()) {
              return base.as_list()[list_index(key, base.as_list().size(), node.index->span)];
            }
            if (base.is_record()) {
              if (!key.is_string()) {
                runtime_fault(node.index->span, "record index must be a string");
              }
              const auto& record = base.as_record();
              auto it = record.find(key.as_string());
              if (it == record.end()) {
                runtime_fault(expr.span, "record has no field '" + key.as_string() + "'");
              }
              return it->second;
            }
            runtime_fault(expr.span, "cannot index into a " + type_name(base));
          }
          return Value();
        },
        expr.node);
  }

  Value eval_unary(const Unary& node, Span span) {
    const Value operand = eval(*node.operand);
    if (node.op == UnaryOp::neg) {
      if (!operand.is_number()) {
        runtime_fault(span, "unary '-' needs a number, got " + type_name(operand));
      }
      return Value::number(-operand.as_number());
    }
    if (!operand.is_boolean()) {
      runtime_fault(span, "'not' needs a boolean, got " + type_name(operand));
    }
    return Value::boolean(!operand.as_boolean());
  }

  Value eval_binary(const Binary& node, Span span) {
    if (node.op == BinaryOp::logic_and || node.op == BinaryOp::logic_or) {
      const Value lhs = eval(*node.lhs);
      if (!lhs.is_boolean()) {
        runtime_fault(node.lhs->span, std::string("'") + to_string(node.op) +
                                          "' needs boolean operands, got " + type_name(lhs));
      }
      if (node.op == BinaryOp::logic_and && !lhs.as_boolean()) return Value::boolean(false);
      if (node.op == BinaryOp::logic_or && lhs.as_boolean()) return Value::boolean(true);
      const Value rhs = eval(*node.rhs);
      if (!rhs.is_boolean()) {
        runtime_fault(node.rhs->span, std::string("'") + to_string(node.op) +
                                          "' needs boolean operands, got " + type_name(rhs));
      }
      return Value::boolean(rhs.as_boolean());
    }

    const Value lhs = eval(*node.lhs);
    const Value rhs = eval(*node.rhs);

    if (node.op == BinaryOp::eq || node.op == BinaryOp::ne) {
      if (lhs.type() != rhs.type()) {
        runtime_fault(span, std::string("cannot compare ") + type_name(lhs) + " with " +
                                type_name(rhs),
                      "equality requires operands of the same type");
      }
      const bool eq = equal_guarded(lhs, rhs, span);
      return Value::boolean(node.op == BinaryOp::eq ? eq : !eq);
    }

    if (node.op == BinaryOp::lt || node.op == BinaryOp::le || node.op == BinaryOp::gt ||
        node.op == BinaryOp::ge) {
      int cmp = 0;
      if (lhs.is_number() && rhs.is_number()) {
        cmp = lhs.as_number() < rhs.as_number() ? -1 : (lhs.as_number() > rhs.as_number() ? 1 : 0);
      } else if (lhs.is_string() && rhs.is_string()) {
        cmp = lhs.as_string().compare(rhs.as_string());
        cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
      } else {
        runtime_fault(span, std::string("cannot order ") + type_name(lhs) + " and " +
                                type_name(rhs),
                      "ordering works on two numbers or two strings");
      }
      switch (node.op) {
        case BinaryOp::lt: return Value::boolean(cmp < 0);
        case BinaryOp::le: return Value::boolean(cmp <= 0);
        case BinaryOp::gt: return Value::boolean(cmp > 0);
        default: return Value::boolean(cmp >= 0);
      }
    }

    if (!lhs.is_number() || !rhs.is_number()) {
      runtime_fault(span, std::string("'") + to_string(node.op) + "' needs numbers, got " +
                              type_name(lhs) + " and " + type_name(rhs));
    }
    const double a = lhs.as_number();
    const double b = rhs.as_number();
    switch (node.op) {
      case BinaryOp::add: return Value::number(a + b);
      case BinaryOp::sub: return Value::number(a - b);
      case BinaryOp::mul: return Value::number(a * b);
      case BinaryOp::div:
        if (b == 0.0) runtime_fault(span, "division by zero");
        return Value::number(a / b);
      case BinaryOp::mod:
        if (b == 0.0) runtime_fault(span, "modulo by zero");
        return Value::number(std::fmod(a, b));
      default:
        runtime_fault(span, "unsupported operator");
    }
  }

  Value eval_call(const Call& call, Span span) {
    const BuiltinSpec* spec = find_builtin(call.name);
    if (spec == nullptr) {
      runtime_fault(span, "unknown builtin '" + call.name + "'",
                    "valid builtins: " + builtin_names_joined());
    }
    std::vector<Value> args;
    args.reserve(call.args.size());
    for (const auto& arg : call.args) args.push_back(eval(*arg));
    if (static_cast<int>(args.size()) != spec->arity) {
      runtime_fault(span, call.name + " takes " + std::to_string(spec->arity) + " argument(s)");
    }

    auto need_list = [&](int i) -> Value& {
      if (!args[i].is_list()) {
        runtime_fault(call.args[i]->span, call.name + " expects a list, got " +
                                              type_name(args[i]),
                      spec->signature);
      }
      return args[i];
    };
    auto need_number = [&](int i) -> double {
      if (!args[i].is_number()) {
        runtime_fault(call.args[i]->span, call.name + " expects a number, got " +
                                              type_name(args[i]),
                      spec->signature);
      }
      return args[i].as_number();
    };
    auto need_int = [&](int i) -> std::int64_t {
      const double v = need_number(i);
      if (v != std::floor(v)) {
        runtime_fault(call.args[i]->span, call.name + " expects an integer, got " +
                                              args[i].repr());
      }
      return static_cast<std::int64_t>(v);
    };
    auto need_string = [&](int i) -> const std::string& {
      if (!args[i].is_string()) {
        runtime_fault(call.args[i]->span, call.name + " expects a string, got " +
                                              type_name(args[i]),
                      spec->signature);
      }
      return args[i].as_string();
    };
    auto need_host = [&]() -> BuiltinHost& {
      if (host_ == nullptr) {
        runtime_fault(span, call.name + " is unavailable during init");
      }
      return *host_;
    };

    if (call.name == "len") {
      return Value::number(static_cast<double>(need_list(0).as_list().size()));
    }
    if (call.name == "append") {
      Value& list = need_list(0);
      if (args[1].is_list() || args[1].is_record()) {
        if (reaches_guarded(args[1], list.container_id(), span)) {
          runtime_fault(span, "append would create a cyclic structure");
        }
      }
      list.as_list().push_back(args[1]);
      return Value();
    }
    if (call.name == "remove_at") {
      Value& list = need_list(0);
      const std::size_t i = list_index(args[1], list.as_list().size(), call.args[1]->span);
      list.as_list().erase(list.as_list().begin() + static_cast<std::ptrdiff_t>(i));
      return Value();
    }
    if (call.name == "sort_by") {
      return sort_by(need_list(0), need_string(1), args[2], call, span);
    }
    if (call.name == "ready_ops") {
      std::string pipeline_id;
      if (args[0].is_string()) {
        pipeline_id = args[0].as_string();
      } else if (args[0].is_record()) {
        const auto& record = args[0].as_record();
        auto it = record.find("pipeline_id");
        if (it == record.end() || !it->second.is_string()) {
          runtime_fault(call.args[0]->span,
                        "ready_ops expects a pipeline id or a record with a pipeline_id field");
        }
        pipeline_id = it->second.as_string();
      } else {
        runtime_fault(call.args[0]->span,
                      "ready_ops expects a pipeline id or a record with a pipeline_id field");
      }
      Value out = need_host().ready_ops(pipeline_id);
      tick(span, static_cast<std::int64_t>(out.as_list().size()));
      return out;
    }
    if (call.name == "num_pools") {
      return Value::number(static_cast<double>(need_host().num_pools()));
    }
    if (call.name == "pool") {
      auto out = need_host().pool(static_cast<int>(need_int(0)));
      if (!out) {
        runtime_fault(span, "pool " + std::to_string(need_int(0)) + " does not exist",
                      "valid pool ids are 0 .. num_pools() - 1");
      }
      return *out;
    }
    if (call.name == "running") {
      auto out = need_host().running(static_cast<int>(need_int(0)));
      if (!out) {
        runtime_fault(span, "pool " + std::to_string(need_int(0)) + " does not exist",
                      "valid pool ids are 0 .. num_pools() - 1");
      }
      tick(span, static_cast<std::int64_t>(out->as_list().size()));
      return *out;
    }
    if (call.name == "assign") {
      need_host().emit_assign(need_string(0), static_cast<int>(need_int(1)));
      return Value();
    }
    if (call.name == "suspend") {
      need_host().emit_suspend(need_string(0));
      return Value();
    }
    if (call.name == "min") {
      return Value::number(std::min(need_number(0), need_number(1)));
    }
    if (call.name == "max") {
      return Value::number(std::max(need_number(0), need_number(1)));
    }
    if (call.name == "floor") {
      return Value::number(std::floor(need_number(0)));
    }
    if (call.name == "ceil") {
      return Value::number(std::ceil(need_number(0)));
    }
    runtime_fault(span, "unknown builtin '" + call.name + "'");
  }

  Value sort_by(Value& list, const std::string& field, const Value& ascending, const Call& call,
                Span span) {
    if (!ascending.is_boolean()) {
      runtime_fault(call.args[2]->span, "sort_by expects a boolean ascending flag");
    }
    ValueList items = list.as_list();
    tick(span, static_cast<std::int64_t>(items.size()));

    // Validate keys up front so comparator failures cannot reorder half a list.
    bool numeric = true;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!items[i].is_record()) {
        runtime_fault(span, "sort_by works on a list of records; element " + std::to_string(i) +
                                " is a " + type_name(items[i]));
      }
      const auto& record = items[i].as_record();
      auto it = record.find(field);
      if (it == record.end()) {
        runtime_fault(span, "sort_by key '" + field + "' is missing from element " +
                                std::to_string(i));
      }
      if (!it->second.is_number() && !it->second.is_string()) {
        runtime_fault(span, "sort_by key '" + field + "' must be a number or a string");
      }
      if (i == 0) {
        numeric = it->second.is_number();
      } else if (numeric != it->second.is_number()) {
        runtime_fault(span, "sort_by key '" + field + "' mixes numbers and strings");
      }
    }
    const bool asc = ascending.as_boolean();
    std::stable_sort(items.begin(), items.end(), [&](const Value& a, const Value& b) {
      const Value& ka = a.as_record().at(field);
      const Value& kb = b.as_record().at(field);
      bool less;
      if (numeric) {
        less = ka.as_number() < kb.as_number();
      } else {
        less = ka.as_string() < kb.as_string();
      }
      return asc ? less : (numeric ? kb.as_number() < ka.as_number()
                                   : kb.as_string() < ka.as_string());
    });
    return Value::list(std::move(items));
  }

  Interpreter& interp_;
  BuiltinHost* host_;
  std::vector<Scope> scopes_;
};

Interpreter::Interpreter(const PolicyProgram& program, std::int64_t max_steps)
    : program_(program), max_steps_(max_steps) {}

void Interpreter::run_init() {
  Execution exec(*this, nullptr);
  exec.run_block_with_scope(program_.program.init_block, {});
}

void Interpreter::run_schedule(const Value& failures, const Value& pipelines, BuiltinHost& host) {
  Execution exec(*this, &host);
  exec.run_block_with_scope(program_.program.schedule_block,
                            {{"failures", failures}, {"pipelines", pipelines}});
}

}  // namespace faasim::policy
