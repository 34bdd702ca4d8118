#include <cmath>
#include <cstdio>
#include <sstream>

#include "faasim/policy/lang.hpp"

namespace faasim::policy {

namespace {

using namespace ast;

const char* op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::mod: return "%";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::logic_and: return "and";
    case BinaryOp::logic_or: return "or";
  }
  return "?";
}

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::logic_or: return 1;
    case BinaryOp::logic_and: return 2;
    case BinaryOp::eq:
    case BinaryOp::ne:
    case BinaryOp::lt:
    case BinaryOp::le:
    case BinaryOp::gt:
    case BinaryOp::ge: return 4;
    case BinaryOp::add:
    case BinaryOp::sub: return 5;
    case BinaryOp::mul:
    case BinaryOp::div:
    case BinaryOp::mod: return 6;
  }
  return 0;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string number_text(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 0x1.0p53 && v >= 0) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Printer {
 public:
  std::string run(const Program& program) {
    out_ << "init ";
    print_block(program.init_block);
    out_ << "\n\nschedule(failures, pipelines) ";
    print_block(program.schedule_block);
    out_ << "\n";
    return out_.str();
  }

 private:
  void print_block(const Block& block) {
    out_ << "{\n";
    ++indent_;
    for (const auto& stmt : block) print_stmt(*stmt);
    --indent_;
    pad();
    out_ << "}";
  }

  void pad() {
    for (int i = 0; i < indent_; ++i) out_ << "    ";
  }

  void print_stmt(const Stmt& stmt) {
    pad();
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, LetStmt>) {
            out_ << "let " << node.name << " = ";
            print_expr(*node.value, 0);
            out_ << ";\n";
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            print_expr(*node.target, 0);
            out_ << " = ";
            print_expr(*node.value, 0);
            out_ << ";\n";
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            out_ << "if ";
            print_expr(*node.condition, 0);
            out_ << " ";
            print_block(node.then_block);
            if (node.has_else) {
              out_ << " else ";
              print_block(node.else_block);
            }
            out_ << "\n";
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            out_ << "for " << node.var << " in ";
            print_expr(*node.iterable, 0);
            out_ << " ";
            print_block(node.body);
            out_ << "\n";
          } else if constexpr (std::is_same_v<T, ExprStmt>) {
            print_expr(*node.expr, 0);
            out_ << ";\n";
          }
        },
        stmt.node);
  }

  void print_expr(const Expr& expr, int parent_prec) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, NumberLit>) {
            if (node.value < 0) {
              out_ << "(" << number_text(node.value) << ")";
            } else {
              out_ << number_text(node.value);
            }
          } else if constexpr (std::is_same_v<T, BoolLit>) {
            out_ << (node.value ? "true" : "false");
          } else if constexpr (std::is_same_v<T, StringLit>) {
            out_ << '"' << escape(node.value) << '"';
          } else if constexpr (std::is_same_v<T, Ident>) {
            out_ << node.name;
          } else if constexpr (std::is_same_v<T, ListLit>) {
            out_ << "[";
            for (std::size_t i = 0; i < node.items.size(); ++i) {
              if (i > 0) out_ << ", ";
              print_expr(*node.items[i], 0);
            }
            out_ << "]";
          } else if constexpr (std::is_same_v<T, RecordLit>) {
            out_ << "{ ";
            for (std::size_t i = 0; i < node.fields.size(); ++i) {
              if (i > 0) out_ << ", ";
              out_ << node.fields[i].key << ": ";
              print_expr(*node.fields[i].value, 0);
            }
            out_ << " }";
          } else if constexpr (std::is_same_v<T, Unary>) {
            out_ << (node.op == UnaryOp::neg ? "-" : "not ");
            out_ << "(";
            print_expr(*node.operand, 0);
            out_ << ")";
          } else if constexpr (std::is_same_v<T, Binary>) {
            const int prec = precedence(node.op);
            const bool parens = prec < parent_prec;
            if (parens) out_ << "(";
            print_expr(*node.lhs, prec);
            out_ << " " << op_symbol(node.op) << " ";
            // +1 keeps right-nested same-precedence trees parenthesized,
            // matching the parser's left associativity.
            print_expr(*node.rhs, prec + 1);
            if (parens) out_ << ")";
          } else if constexpr (std::is_same_v<T, Call>) {
            out_ << node.name << "(";
            for (std::size_t i = 0; i < node.args.size(); ++i) {
              if (i > 0) out_ << ", ";
              print_expr(*node.args[i], 0);
            }
            out_ << ")";
          } else if constexpr (std::is_same_v<T, Member>) {
            print_expr(*node.base, 10);
            out_ << "." << node.field;
          } else if constexpr (std::is_same_v<T, Index>) {
            print_expr(*node.base, 10);
            out_ << "[";
            print_expr(*node.index, 0);
            out_ << "]";
          }
        },
        expr.node);
  }

  std::ostringstream out_;
  int indent_ = 0;
};

bool expr_equal(const Expr& a, const Expr& b);

bool block_equal(const Block& a, const Block& b);

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* la = std::get_if<LetStmt>(&a.node)) {
    const auto& lb = std::get<LetStmt>(b.node);
    return la->name == lb.name && expr_equal(*la->value, *lb.value);
  }
  if (const auto* aa = std::get_if<AssignStmt>(&a.node)) {
    const auto& ab = std::get<AssignStmt>(b.node);
    return expr_equal(*aa->target, *ab.target) && expr_equal(*aa->value, *ab.value);
  }
  if (const auto* ia = std::get_if<IfStmt>(&a.node)) {
    const auto& ib = std::get<IfStmt>(b.node);
    return ia->has_else == ib.has_else && expr_equal(*ia->condition, *ib.condition) &&
           block_equal(ia->then_block, ib.then_block) && block_equal(ia->else_block, ib.else_block);
  }
  if (const auto* fa = std::get_if<ForStmt>(&a.node)) {
    const auto& fb = std::get<ForStmt>(b.node);
    return fa->var == fb.var && expr_equal(*fa->iterable, *fb.iterable) &&
           block_equal(fa->body, fb.body);
  }
  const auto& ea = std::get<ExprStmt>(a.node);
  const auto& eb = std::get<ExprStmt>(b.node);
  return expr_equal(*ea.expr, *eb.expr);
}

bool block_equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!stmt_equal(*a[i], *b[i])) return false;
  }
  return true;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* na = std::get_if<NumberLit>(&a.node)) {
    return na->value == std::get<NumberLit>(b.node).value;
  }
  if (const auto* ba = std::get_if<BoolLit>(&a.node)) {
    return ba->value == std::get<BoolLit>(b.node).value;
  }
  if (const auto* sa = std::get_if<StringLit>(&a.node)) {
    return sa->value == std::get<StringLit>(b.node).value;
  }
  if (const auto* ia = std::get_if<Ident>(&a.node)) {
    return ia->name == std::get<Ident>(b.node).name;
  }
  if (const auto* la = std::get_if<ListLit>(&a.node)) {
    const auto& lb = std::get<ListLit>(b.node);
    if (la->items.size() != lb.items.size()) return false;
    for (std::size_t i = 0; i < la->items.size(); ++i) {
      if (!expr_equal(*la->items[i], *lb.items[i])) return false;
    }
    return true;
  }
  if (const auto* ra = std::get_if<RecordLit>(&a.node)) {
    const auto& rb = std::get<RecordLit>(b.node);
    if (ra->fields.size() != rb.fields.size()) return false;
    for (std::size_t i = 0; i < ra->fields.size(); ++i) {
      if (ra->fields[i].key != rb.fields[i].key) return false;
      if (!expr_equal(*ra->fields[i].value, *rb.fields[i].value)) return false;
    }
    return true;
  }
  if (const auto* ua = std::get_if<Unary>(&a.node)) {
    const auto& ub = std::get<Unary>(b.node);
    return ua->op == ub.op && expr_equal(*ua->operand, *ub.operand);
  }
  if (const auto* bb = std::get_if<Binary>(&a.node)) {
    const auto& other = std::get<Binary>(b.node);
    return bb->op == other.op && expr_equal(*bb->lhs, *other.lhs) &&
           expr_equal(*bb->rhs, *other.rhs);
  }
  if (const auto* ca = std::get_if<Call>(&a.node)) {
    const auto& cb = std::get<Call>(b.node);
    if (ca->name != cb.name || ca->args.size() != cb.args.size()) return false;
    for (std::size_t i = 0; i < ca->args.size(); ++i) {
      if (!expr_equal(*ca->args[i], *cb.args[i])) return false;
    }
    return true;
  }
  if (const auto* ma = std::get_if<Member>(&a.node)) {
    const auto& mb = std::get<Member>(b.node);
    return ma->field == mb.field && expr_equal(*ma->base, *mb.base);
  }
  const auto& xa = std::get<Index>(a.node);
  const auto& xb = std::get<Index>(b.node);
  return expr_equal(*xa.base, *xb.base) && expr_equal(*xa.index, *xb.index);
}

}  // namespace

std::string pretty_print(const ast::Program& program) { return Printer().run(program); }

namespace ast {

bool equal(const Program& a, const Program& b) {
  return block_equal(a.init_block, b.init_block) &&
         block_equal(a.schedule_block, b.schedule_block);
}

const char* to_string(BinaryOp op) { return op_symbol(op); }

}  // namespace ast

}  // namespace faasim::policy
