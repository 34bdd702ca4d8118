#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "faasim/policy/ast.hpp"

namespace faasim::policy {

enum class ErrorKind { parse, static_check, runtime, budget };

const char* to_string(ErrorKind k);

struct InterpError {
  ErrorKind kind = ErrorKind::parse;
  std::string message;
  int line = 0;  // 0 = no span available
  int column = 0;
  std::string hint;

  std::string render() const;
};

// A parsed policy plus its original text. The AST always round-trips
// through pretty_print/parse.
struct PolicyProgram {
  std::string source_text;
  ast::Program program;
};

using ParseResult = std::variant<PolicyProgram, InterpError>;

ParseResult parse(std::string_view source_text);

// Builtin existence/arity, definite assignment along all paths, and
// placement rules (assign/suspend only inside schedule).
std::optional<InterpError> validate_program(const PolicyProgram& program);

// Canonical rendering; parse(pretty_print(p)) reproduces the AST.
std::string pretty_print(const ast::Program& program);

}  // namespace faasim::policy
