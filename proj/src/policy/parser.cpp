#include <cctype>
#include <cstdlib>
#include <map>

#include "faasim/policy/lang.hpp"

namespace faasim::policy {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::static_check: return "static";
    case ErrorKind::runtime: return "runtime";
    case ErrorKind::budget: return "budget";
  }
  return "?";
}

std::string InterpError::render() const {
  std::string out = std::string(to_string(kind)) + " error";
  if (line > 0) {
    out += " at line " + std::to_string(line) + ", column " + std::to_string(column);
  }
  out += ": " + message;
  if (!hint.empty()) out += "\nhint: " + hint;
  return out;
}

namespace {

using namespace ast;

enum class Tok {
  ident,
  number,
  string,
  kw_init,
  kw_schedule,
  kw_let,
  kw_if,
  kw_else,
  kw_for,
  kw_in,
  kw_and,
  kw_or,
  kw_not,
  kw_true,
  kw_false,
  lbrace,
  rbrace,
  lparen,
  rparen,
  lbracket,
  rbracket,
  semicolon,
  comma,
  dot,
  colon,
  assign,
  plus,
  minus,
  star,
  slash,
  percent,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0.0;
  Span span;
};

struct ParseFail {
  InterpError error;
};

[[noreturn]] void fail(Span span, std::string message, std::string hint = {}) {
  throw ParseFail{InterpError{ErrorKind::parse, std::move(message), span.line, span.column,
                              std::move(hint)}};
}

const std::map<std::string, Tok, std::less<>>& keywords() {
  static const std::map<std::string, Tok, std::less<>> table = {
      {"init", Tok::kw_init}, {"schedule", Tok::kw_schedule}, {"let", Tok::kw_let},
      {"if", Tok::kw_if},     {"else", Tok::kw_else},         {"for", Tok::kw_for},
      {"in", Tok::kw_in},     {"and", Tok::kw_and},           {"or", Tok::kw_or},
      {"not", Tok::kw_not},   {"true", Tok::kw_true},         {"false", Tok::kw_false},
  };
  return table;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token tok = next_token();
      const bool at_end = tok.kind == Tok::end;
      out.push_back(std::move(tok));
      if (at_end) break;
    }
    return out;
  }

 private:
  void skip_trivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        column_ = 1;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token next_token() {
    Token tok;
    tok.span = Span{line_, column_};
    if (pos_ >= src_.size()) return tok;

    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_')) {
        word.push_back(src_[pos_]);
        advance();
      }
      auto kw = keywords().find(word);
      tok.kind = kw == keywords().end() ? Tok::ident : kw->second;
      tok.text = std::move(word);
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      bool saw_dot = false;
      while (pos_ < src_.size()) {
        const char d = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          digits.push_back(d);
          advance();
        } else if (d == '.' && !saw_dot && pos_ + 1 < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          saw_dot = true;
          digits.push_back(d);
          advance();
        } else {
          break;
        }
      }
      tok.kind = Tok::number;
      tok.number = std::strtod(digits.c_str(), nullptr);
      tok.text = std::move(digits);
      return tok;
    }
    if (c == '"') {
      advance();
      std::string text;
      for (;;) {
        if (pos_ >= src_.size() || src_[pos_] == '\n') {
          fail(tok.span, "unterminated string literal", "close the string with '\"'");
        }
        const char d = src_[pos_];
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\') {
          advance();
          if (pos_ >= src_.size()) fail(tok.span, "unterminated string literal");
          const char esc = src_[pos_];
          if (esc == 'n') {
            text.push_back('\n');
          } else if (esc == '\\' || esc == '"') {
            text.push_back(esc);
          } else {
            fail(Span{line_, column_}, std::string("unknown escape '\\") + esc + "'",
                 "supported escapes: \\n \\\\ \\\"");
          }
          advance();
        } else {
          text.push_back(d);
          advance();
        }
      }
      tok.kind = Tok::string;
      tok.text = std::move(text);
      return tok;
    }

    auto two = [&](char second, Tok pair, Tok single) {
      advance();
      if (pos_ < src_.size() && src_[pos_] == second) {
        advance();
        tok.kind = pair;
      } else {
        tok.kind = single;
      }
    };
    switch (c) {
      case '{': tok.kind = Tok::lbrace; advance(); break;
      case '}': tok.kind = Tok::rbrace; advance(); break;
      case '(': tok.kind = Tok::lparen; advance(); break;
      case ')': tok.kind = Tok::rparen; advance(); break;
      case '[': tok.kind = Tok::lbracket; advance(); break;
      case ']': tok.kind = Tok::rbracket; advance(); break;
      case ';': tok.kind = Tok::semicolon; advance(); break;
      case ',': tok.kind = Tok::comma; advance(); break;
      case '.': tok.kind = Tok::dot; advance(); break;
      case ':': tok.kind = Tok::colon; advance(); break;
      case '+': tok.kind = Tok::plus; advance(); break;
      case '-': tok.kind = Tok::minus; advance(); break;
      case '*': tok.kind = Tok::star; advance(); break;
      case '/': tok.kind = Tok::slash; advance(); break;
      case '%': tok.kind = Tok::percent; advance(); break;
      case '=': two('=', Tok::eq, Tok::assign); break;
      case '<': two('=', Tok::le, Tok::lt); break;
      case '>': two('=', Tok::ge, Tok::gt); break;
      case '!':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          advance();
          tok.kind = Tok::ne;
        } else {
          fail(tok.span, "unexpected '!'", "use 'not' for negation, '!=' for inequality");
        }
        break;
      default:
        fail(tok.span, std::string("unexpected character '") + c + "'");
    }
    return tok;
  }

  void advance() {
    ++pos_;
    ++column_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

const char* token_name(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::string: return "string";
    case Tok::kw_init: return "'init'";
    case Tok::kw_schedule: return "'schedule'";
    case Tok::kw_let: return "'let'";
    case Tok::kw_if: return "'if'";
    case Tok::kw_else: return "'else'";
    case Tok::kw_for: return "'for'";
    case Tok::kw_in: return "'in'";
    case Tok::kw_and: return "'and'";
    case Tok::kw_or: return "'or'";
    case Tok::kw_not: return "'not'";
    case Tok::kw_true: return "'true'";
    case Tok::kw_false: return "'false'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::semicolon: return "';'";
    case Tok::comma: return "','";
    case Tok::dot: return "'.'";
    case Tok::colon: return "':'";
    case Tok::assign: return "'='";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::star: return "'*'";
    case Tok::slash: return "'/'";
    case Tok::percent: return "'%'";
    case Tok::eq: return "'=='";
    case Tok::ne: return "'!='";
    case Tok::lt: return "'<'";
    case Tok::le: return "'<='";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::end: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Program parse_program() {
    Program program;
    program.init_span = peek().span;
    expect(Tok::kw_init, "a policy starts with an 'init' block");
    program.init_block = parse_block();

    program.schedule_span = peek().span;
    expect(Tok::kw_schedule, "the init block must be followed by 'schedule(failures, pipelines)'");
    expect(Tok::lparen, "write schedule(failures, pipelines)");
    expect_ident("failures", "the first schedule parameter must be named 'failures'");
    expect(Tok::comma, "write schedule(failures, pipelines)");
    expect_ident("pipelines", "the second schedule parameter must be named 'pipelines'");
    expect(Tok::rparen, "write schedule(failures, pipelines)");
    program.schedule_block = parse_block();

    if (peek().kind != Tok::end) {
      fail(peek().span, "unexpected input after the schedule block",
           "a policy is exactly one init block and one schedule block");
    }
    return program;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
  }

  Token take() {
    Token tok = tokens_[std::min(pos_, tokens_.size() - 1)];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return tok;
  }

  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    take();
    return true;
  }

  Token expect(Tok kind, std::string hint = {}) {
    if (peek().kind != kind) {
      fail(peek().span,
           std::string("expected ") + token_name(kind) + ", found " + token_name(peek().kind),
           std::move(hint));
    }
    return take();
  }

  void expect_ident(std::string_view name, std::string hint) {
    const Token tok = expect(Tok::ident, hint);
    if (tok.text != name) fail(tok.span, "expected '" + std::string(name) + "'", std::move(hint));
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& parser) : parser_(parser) {
      if (++parser_.depth_ > kMaxNesting) {
        fail(parser_.peek().span, "input is nested too deeply");
      }
    }
    ~DepthGuard() { --parser_.depth_; }
    Parser& parser_;
  };

  Block parse_block() {
    DepthGuard guard(*this);
    expect(Tok::lbrace, "blocks are delimited by '{' and '}'");
    Block block;
    while (peek().kind != Tok::rbrace) {
      if (peek().kind == Tok::end) {
        fail(peek().span, "unexpected end of input inside a block", "missing '}'");
      }
      block.push_back(parse_stmt());
    }
    expect(Tok::rbrace);
    return block;
  }

  StmtPtr parse_stmt() {
    const Span span = peek().span;
    auto stmt = std::make_unique<Stmt>();
    stmt->span = span;

    if (accept(Tok::kw_let)) {
      LetStmt let;
      let.name = expect(Tok::ident, "let introduces a named variable: let x = ...;").text;
      expect(Tok::assign, "let requires an initializer: let x = ...;");
      let.value = parse_expr();
      expect(Tok::semicolon, "statements end with ';'");
      stmt->node = std::move(let);
      return stmt;
    }
    if (peek().kind == Tok::kw_if) {
      stmt->node = parse_if();
      return stmt;
    }
    if (accept(Tok::kw_for)) {
      ForStmt loop;
      loop.var = expect(Tok::ident, "for introduces a loop variable: for x in ...").text;
      expect(Tok::kw_in, "write for x in <list or count> { ... }");
      loop.iterable = parse_expr();
      loop.body = parse_block();
      stmt->node = std::move(loop);
      return stmt;
    }

    ExprPtr expr = parse_expr();
    if (peek().kind == Tok::assign) {
      if (!std::holds_alternative<Ident>(expr->node) &&
          !std::holds_alternative<Member>(expr->node) &&
          !std::holds_alternative<Index>(expr->node)) {
        fail(peek().span, "left side of '=' is not assignable",
             "assign to a variable, a field, or a list element");
      }
      take();
      AssignStmt assign;
      assign.target = std::move(expr);
      assign.value = parse_expr();
      expect(Tok::semicolon, "statements end with ';'");
      stmt->node = std::move(assign);
      return stmt;
    }
    expect(Tok::semicolon, "statements end with ';'");
    stmt->node = ExprStmt{std::move(expr)};
    return stmt;
  }

  IfStmt parse_if() {
    expect(Tok::kw_if);
    IfStmt out;
    out.condition = parse_expr();
    out.then_block = parse_block();
    if (accept(Tok::kw_else)) {
      out.has_else = true;
      if (peek().kind == Tok::kw_if) {
        // else-if sugar: wrap the chained if in a single-statement block
        auto chained = std::make_unique<Stmt>();
        chained->span = peek().span;
        chained->node = parse_if();
        out.else_block.push_back(std::move(chained));
      } else {
        out.else_block = parse_block();
      }
    }
    return out;
  }

  ExprPtr parse_expr() {
    DepthGuard guard(*this);
    return parse_or();
  }

  ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, Span span) {
    auto e = std::make_unique<Expr>();
    e->span = span;
    e->node = Binary{op, std::move(lhs), std::move(rhs)};
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (peek().kind == Tok::kw_or) {
      const Span span = take().span;
      lhs = make_binary(BinaryOp::logic_or, std::move(lhs), parse_and(), span);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (peek().kind == Tok::kw_and) {
      const Span span = take().span;
      lhs = make_binary(BinaryOp::logic_and, std::move(lhs), parse_not(), span);
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (peek().kind == Tok::kw_not) {
      const Span span = take().span;
      auto e = std::make_unique<Expr>();
      e->span = span;
      e->node = Unary{UnaryOp::logic_not, parse_not()};
      return e;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_additive();
    const Tok kind = peek().kind;
    BinaryOp op;
    switch (kind) {
      case Tok::eq: op = BinaryOp::eq; break;
      case Tok::ne: op = BinaryOp::ne; break;
      case Tok::lt: op = BinaryOp::lt; break;
      case Tok::le: op = BinaryOp::le; break;
      case Tok::gt: op = BinaryOp::gt; break;
      case Tok::ge: op = BinaryOp::ge; break;
      default: return lhs;
    }
    const Span span = take().span;
    // Comparisons do not chain: a < b < c is a parse error.
    ExprPtr rhs = parse_additive();
    if (peek().kind == Tok::eq || peek().kind == Tok::ne || peek().kind == Tok::lt ||
        peek().kind == Tok::le || peek().kind == Tok::gt || peek().kind == Tok::ge) {
      fail(peek().span, "comparisons cannot be chained",
           "split into two comparisons joined with 'and'");
    }
    return make_binary(op, std::move(lhs), std::move(rhs), span);
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    for (;;) {
      BinaryOp op;
      if (peek().kind == Tok::plus) {
        op = BinaryOp::add;
      } else if (peek().kind == Tok::minus) {
        op = BinaryOp::sub;
      } else {
        return lhs;
      }
      const Span span = take().span;
      lhs = make_binary(op, std::move(lhs), parse_multiplicative(), span);
    }
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      BinaryOp op;
      if (peek().kind == Tok::star) {
        op = BinaryOp::mul;
      } else if (peek().kind == Tok::slash) {
        op = BinaryOp::div;
      } else if (peek().kind == Tok::percent) {
        op = BinaryOp::mod;
      } else {
        return lhs;
      }
      const Span span = take().span;
      lhs = make_binary(op, std::move(lhs), parse_unary(), span);
    }
  }

  ExprPtr parse_unary() {
    if (peek().kind == Tok::minus) {
      const Span span = take().span;
      auto e = std::make_unique<Expr>();
      e->span = span;
      e->node = Unary{UnaryOp::neg, parse_unary()};
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr expr = parse_primary();
    for (;;) {
      if (peek().kind == Tok::dot) {
        const Span span = take().span;
        const Token field = expect(Tok::ident, "a field name must follow '.'");
        auto e = std::make_unique<Expr>();
        e->span = span;
        e->node = Member{std::move(expr), field.text};
        expr = std::move(e);
      } else if (peek().kind == Tok::lbracket) {
        const Span span = take().span;
        ExprPtr index = parse_expr();
        expect(Tok::rbracket, "index expressions are closed with ']'");
        auto e = std::make_unique<Expr>();
        e->span = span;
        e->node = Index{std::move(expr), std::move(index)};
        expr = std::move(e);
      } else {
        return expr;
      }
    }
  }

  ExprPtr parse_primary() {
    const Token tok = peek();
    auto e = std::make_unique<Expr>();
    e->span = tok.span;
    switch (tok.kind) {
      case Tok::number:
        take();
        e->node = NumberLit{tok.number};
        return e;
      case Tok::string:
        take();
        e->node = StringLit{tok.text};
        return e;
      case Tok::kw_true:
        take();
        e->node = BoolLit{true};
        return e;
      case Tok::kw_false:
        take();
        e->node = BoolLit{false};
        return e;
      case Tok::ident: {
        take();
        if (peek().kind == Tok::lparen) {
          take();
          Call call;
          call.name = tok.text;
          if (peek().kind != Tok::rparen) {
            for (;;) {
              call.args.push_back(parse_expr());
              if (!accept(Tok::comma)) break;
            }
          }
          expect(Tok::rparen, "close the call with ')'");
          e->node = std::move(call);
        } else {
          e->node = Ident{tok.text};
        }
        return e;
      }
      case Tok::lparen: {
        take();
        ExprPtr inner = parse_expr();
        expect(Tok::rparen, "close the parenthesized expression with ')'");
        return inner;
      }
      case Tok::lbracket: {
        take();
        ListLit list;
        if (peek().kind != Tok::rbracket) {
          for (;;) {
            list.items.push_back(parse_expr());
            if (!accept(Tok::comma)) break;
            if (peek().kind == Tok::rbracket) break;  // trailing comma
          }
        }
        expect(Tok::rbracket, "close the list with ']'");
        e->node = std::move(list);
        return e;
      }
      case Tok::lbrace: {
        take();
        RecordLit record;
        if (peek().kind != Tok::rbrace) {
          for (;;) {
            RecordField field;
            field.key = expect(Tok::ident, "record fields are written key: value").text;
            expect(Tok::colon, "record fields are written key: value");
            field.value = parse_expr();
            record.fields.push_back(std::move(field));
            if (!accept(Tok::comma)) break;
            if (peek().kind == Tok::rbrace) break;  // trailing comma
          }
        }
        expect(Tok::rbrace, "close the record with '}'");
        e->node = std::move(record);
        return e;
      }
      default:
        fail(tok.span, std::string("expected an expression, found ") + token_name(tok.kind));
    }
  }

  static constexpr int kMaxNesting = 256;

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

ParseResult parse(std::string_view source_text) {
  try {
    Lexer lexer(source_text);
    Parser parser(lexer.run());
    ast::Program program = parser.parse_program();
    return PolicyProgram{std::string(source_text), std::move(program)};
  } catch (const ParseFail& f) {
    return f.error;
  }
}

}  // namespace faasim::policy
