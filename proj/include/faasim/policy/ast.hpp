#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace faasim::policy::ast {

struct Span {
  int line = 0;
  int column = 0;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class BinaryOp { add, sub, mul, div, mod, eq, ne, lt, le, gt, ge, logic_and, logic_or };
enum class UnaryOp { neg, logic_not };

const char* to_string(BinaryOp op);

struct NumberLit {
  double value = 0.0;
};
struct BoolLit {
  bool value = false;
};
struct StringLit {
  std::string value;
};
struct Ident {
  std::string name;
};
struct ListLit {
  std::vector<ExprPtr> items;
};
struct RecordField {
  std::string key;
  ExprPtr value;
};
struct RecordLit {
  std::vector<RecordField> fields;
};
struct Unary {
  UnaryOp op{};
  ExprPtr operand;
};
struct Binary {
  BinaryOp op{};
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Call {
  std::string name;
  std::vector<ExprPtr> args;
};
struct Member {
  ExprPtr base;
  std::string field;
};
struct Index {
  ExprPtr base;
  ExprPtr index;
};

struct Expr {
  Span span;
  std::variant<NumberLit, BoolLit, StringLit, Ident, ListLit, RecordLit, Unary, Binary, Call,
               Member, Index>
      node;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct LetStmt {
  std::string name;
  ExprPtr value;
};
struct AssignStmt {
  ExprPtr target;  // Ident, Member, or Index chain
  ExprPtr value;
};
struct IfStmt {
  ExprPtr condition;
  Block then_block;
  Block else_block;  // empty when absent
  bool has_else = false;
};
struct ForStmt {
  std::string var;
  ExprPtr iterable;
  Block body;
};
struct ExprStmt {
  ExprPtr expr;
};

struct Stmt {
  Span span;
  std::variant<LetStmt, AssignStmt, IfStmt, ForStmt, ExprStmt> node;
};

struct Program {
  Block init_block;
  Block schedule_block;
  Span init_span;
  Span schedule_span;
};

bool equal(const Program& a, const Program& b);  // structural, spans ignored

}  // namespace faasim::policy::ast
