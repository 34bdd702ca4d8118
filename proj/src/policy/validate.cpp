#include <map>
#include <set>

#include "faasim/policy/builtins.hpp"
#include "faasim/policy/lang.hpp"

namespace faasim::policy {

namespace {

using namespace ast;

struct StaticFail {
  InterpError error;
};

[[noreturn]] void fail(Span span, std::string message, std::string hint = {}) {
  throw StaticFail{InterpError{ErrorKind::static_check, std::move(message), span.line, span.column,
                               std::move(hint)}};
}

class Checker {
 public:
  void check(const Program& program) {
    in_schedule_ = false;
    scopes_ = {{"state"}};
    check_block(program.init_block);

    in_schedule_ = true;
    scopes_ = {{"state", "failures", "pipelines"}};
    check_block(program.schedule_block);
  }

 private:
  void check_block(const Block& block) {
    scopes_.emplace_back();
    for (const auto& stmt : block) check_stmt(*stmt);
    scopes_.pop_back();
  }

  bool defined(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (it->count(name) > 0) return true;
    }
    return false;
  }

  void check_stmt(const Stmt& stmt) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, LetStmt>) {
            check_expr(*node.value);
            if (scopes_.back().count(node.name) > 0) {
              fail(stmt.span, "variable '" + node.name + "' is already defined in this block",
                   "assign with '" + node.name + " = ...;' or pick a new name");
            }
            scopes_.back().insert(node.name);
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            check_assign_target(*node.target);
            check_expr(*node.value);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            check_expr(*node.condition);
            check_block(node.then_block);
            if (node.has_else) check_block(node.else_block);
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            check_expr(*node.iterable);
            scopes_.emplace_back();
            scopes_.back().insert(node.var);
            for (const auto& inner : node.body) check_stmt(*inner);
            scopes_.pop_back();
          } else if constexpr (std::is_same_v<T, ExprStmt>) {
            check_expr(*node.expr);
          }
        },
        stmt.node);
  }

  void check_assign_target(const Expr& target) {
    if (const auto* ident = std::get_if<Ident>(&target.node)) {
      if (ident->name == "state") {
        fail(target.span, "'state' itself cannot be reassigned",
             "assign to a field instead: state.<name> = ...;");
      }
      if (!defined(ident->name)) {
        fail(target.span, "assignment to undefined variable '" + ident->name + "'",
             "declare it first: let " + ident->name + " = ...;");
      }
      return;
    }
    if (const auto* member = std::get_if<Member>(&target.node)) {
      check_assign_base(*member->base);
      return;
    }
    if (const auto* index = std::get_if<Index>(&target.node)) {
      check_assign_base(*index->base);
      check_expr(*index->index);
      return;
    }
    fail(target.span, "left side of '=' is not assignable");
  }

  // The root of a member/index chain must be a defined variable.
  void check_assign_base(const Expr& base) {
    if (const auto* ident = std::get_if<Ident>(&base.node)) {
      if (!defined(ident->name)) {
        fail(base.span, "use of undefined variable '" + ident->name + "'",
             "declare it first with let");
      }
      return;
    }
    if (const auto* member = std::get_if<Member>(&base.node)) {
      check_assign_base(*member->base);
      return;
    }
    if (const auto* index = std::get_if<Index>(&base.node)) {
      check_assign_base(*index->base);
      check_expr(*index->index);
      return;
    }
    fail(base.span, "left side of '=' is not assignable",
         "assign to a variable, a field, or a list element");
  }

  void check_expr(const Expr& expr) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Ident>) {
            if (!defined(node.name)) {
              fail(expr.span, "use of undefined variable '" + node.name + "'",
                   node.name == "state" ? "" : "declare it first with let");
            }
          } else if constexpr (std::is_same_v<T, ListLit>) {
            for (const auto& item : node.items) check_expr(*item);
          } else if constexpr (std::is_same_v<T, RecordLit>) {
            std::set<std::string> keys;
            for (const auto& field : node.fields) {
              if (!keys.insert(field.key).second) {
                fail(expr.span, "record literal repeats field '" + field.key + "'");
              }
              check_expr(*field.value);
            }
          } else if constexpr (std::is_same_v<T, Unary>) {
            check_expr(*node.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            check_expr(*node.lhs);
            check_expr(*node.rhs);
          } else if constexpr (std::is_same_v<T, Call>) {
            check_call(expr.span, node);
          } else if constexpr (std::is_same_v<T, Member>) {
            check_expr(*node.base);
          } else if constexpr (std::is_same_v<T, Index>) {
            check_expr(*node.base);
            check_expr(*node.index);
          }
        },
        expr.node);
  }

  void check_call(Span span, const Call& call) {
    const BuiltinSpec* spec = find_builtin(call.name);
    if (spec == nullptr) {
      fail(span, "unknown builtin '" + call.name + "'",
           "valid builtins: " + builtin_names_joined());
    }
    if (static_cast<int>(call.args.size()) != spec->arity) {
      fail(span, call.name + " takes " + std::to_string(spec->arity) + " argument(s), got " +
                     std::to_string(call.args.size()),
           std::string("signature: ") + spec->signature);
    }
    if (spec->schedule_only && !in_schedule_) {
      fail(span, call.name + " is schedule-only",
           "emit decisions from the schedule block; init only prepares state");
    }
    for (const auto& arg : call.args) check_expr(*arg);
  }

  bool in_schedule_ = false;
  std::vector<std::set<std::string>> scopes_;
};

}  // namespace

std::optional<InterpError> validate_program(const PolicyProgram& program) {
  try {
    Checker().check(program.program);
    return std::nullopt;
  } catch (const StaticFail& f) {
    return f.error;
  }
}

}  // namespace faasim::policy
