#include <doctest.h>

#include "faasim/policy/lang.hpp"
#include "faasim/policy/policy.hpp"

using namespace faasim::policy;

namespace {

PolicyProgram parse_ok(const std::string& source) {
  ParseResult result = parse(source);
  auto* program = std::get_if<PolicyProgram>(&result);
  REQUIRE_MESSAGE(program != nullptr, std::get<InterpError>(result).render());
  return std::move(*program);
}

InterpError parse_fail(const std::string& source) {
  ParseResult result = parse(source);
  auto* error = std::get_if<InterpError>(&result);
  REQUIRE(error != nullptr);
  return *error;
}

const char* kMinimal = "init { } schedule(failures, pipelines) { }";

}  // namespace

TEST_CASE("the shipped FIFO source parses and validates") {
  PolicyProgram program = parse_ok(fifo_source());
  CHECK(!program.program.init_block.empty());
  CHECK(!program.program.schedule_block.empty());
  CHECK(!validate_program(program).has_value());
}

TEST_CASE("the shipped preempting policy parses and validates") {
  PolicyProgram program = parse_ok(sjf_preempt_source());
  CHECK(!validate_program(program).has_value());
}

TEST_CASE("a missing schedule block is a parse error naming the block") {
  InterpError error = parse_fail("init { }");
  CHECK(error.kind == ErrorKind::parse);
  CHECK(error.message.find("schedule") != std::string::npos);
}

TEST_CASE("an unbalanced brace reports the right position") {
  InterpError error = parse_fail("init {\n  let x = 1;\nschedule(failures, pipelines) { }");
  CHECK(error.kind == ErrorKind::parse);
  // the parser runs off the end looking for '}'
  CHECK(error.line >= 3);
}

TEST_CASE("parse errors carry line and column") {
  InterpError error = parse_fail("init {\n  let x = ;\n} schedule(failures, pipelines) { }");
  CHECK(error.kind == ErrorKind::parse);
  CHECK(error.line == 2);
  CHECK(error.column >= 11);
}

TEST_CASE("unknown builtin fails static validation and lists the builtin set") {
  PolicyProgram program =
      parse_ok("init { } schedule(failures, pipelines) { sort_magic(1); }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->kind == ErrorKind::static_check);
  CHECK(error->message.find("sort_magic") != std::string::npos);
  CHECK(error->hint.find("assign") != std::string::npos);
  CHECK(error->hint.find("sort_by") != std::string::npos);
}

TEST_CASE("assign inside init is schedule-only") {
  PolicyProgram program =
      parse_ok("init { assign(\"x\", 0); } schedule(failures, pipelines) { }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("schedule-only") != std::string::npos);
}

TEST_CASE("wrong builtin arity is a static error") {
  PolicyProgram program = parse_ok("init { } schedule(failures, pipelines) { len(1, 2); }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("len") != std::string::npos);
}

TEST_CASE("use before definition is a static error") {
  PolicyProgram program =
      parse_ok("init { } schedule(failures, pipelines) { let x = y + 1; }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("'y'") != std::string::npos);
}

TEST_CASE("variables defined in a branch do not escape it") {
  PolicyProgram program = parse_ok(
      "init { } schedule(failures, pipelines) { if len(failures) > 0 { let t = 1; } let u = t; }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("'t'") != std::string::npos);
}

TEST_CASE("duplicate let in one block is a static error") {
  PolicyProgram program =
      parse_ok("init { let a = 1; let a = 2; } schedule(failures, pipelines) { }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("'a'") != std::string::npos);
}

TEST_CASE("state cannot be rebound") {
  PolicyProgram program = parse_ok("init { state = 5; } schedule(failures, pipelines) { }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("state") != std::string::npos);
}

TEST_CASE("loop variables are scoped to the loop body") {
  PolicyProgram program = parse_ok(
      "init { } schedule(failures, pipelines) { for p in pipelines { let v = p; } let w = p; }");
  auto error = validate_program(program);
  REQUIRE(error.has_value());
  CHECK(error->message.find("'p'") != std::string::npos);
}

TEST_CASE("else-if chains parse") {
  PolicyProgram program = parse_ok(
      "init { } schedule(failures, pipelines) {"
      "  let n = len(failures);"
      "  if n == 0 { } else if n == 1 { } else { }"
      "}");
  CHECK(!validate_program(program).has_value());
}

TEST_CASE("chained comparisons are rejected") {
  InterpError error =
      parse_fail("init { } schedule(failures, pipelines) { let x = 1 < 2 < 3; }");
  CHECK(error.message.find("chained") != std::string::npos);
}

TEST_CASE("deeply nested input is rejected instead of crashing") {
  std::string source = "init { let x = ";
  for (int i = 0; i < 3000; ++i) source += "(";
  source += "1";
  for (int i = 0; i < 3000; ++i) source += ")";
  source += "; } schedule(failures, pipelines) { }";
  InterpError error = parse_fail(source);
  CHECK(error.message.find("nested") != std::string::npos);
}

TEST_CASE("parse/print stability: pretty-printed ASTs reparse identically") {
  for (const std::string& source :
       {fifo_source(), sjf_preempt_source(),
        std::string("init { let a = [1, 2, { k: \"v\" }]; }"
                    " schedule(failures, pipelines) {"
                    "   let b = (1 + 2) * 3 - 4 / (5 % 2);"
                    "   let c = not (true and false) or 1 < 2;"
                    "   let d = a[0] + a[2].k[0 * 1];"
                    "   if c { b = -b; } else { for i in 3 { b = b + i; } }"
                    " }")}) {
    PolicyProgram original = parse_ok(source);
    const std::string printed = pretty_print(original.program);
    PolicyProgram reparsed = parse_ok(printed);
    CHECK_MESSAGE(ast::equal(original.program, reparsed.program), printed);
    // printing is a fixed point after one round
    CHECK(pretty_print(reparsed.program) == printed);
  }
}

TEST_CASE("minimal program is accepted") {
  PolicyProgram program = parse_ok(kMinimal);
  CHECK(!validate_program(program).has_value());
  CHECK(program.program.init_block.empty());
  CHECK(program.program.schedule_block.empty());
}
