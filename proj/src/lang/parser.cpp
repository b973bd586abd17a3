#include "tardi/lang/parser.hpp"

#include <array>
#include <algorithm>

namespace tardi::lang {

std::string_view op_symbol(UnaryOp op) { return op == UnaryOp::negate ? "-" : "!"; }

std::string_view op_symbol(BinaryOp op) {
  switch (op) {
  case BinaryOp::add: return "+";
  case BinaryOp::sub: return "-";
  case BinaryOp::mul: return "*";
  case BinaryOp::div: return "/";
  case BinaryOp::mod: return "%";
  case BinaryOp::concat: return "++";
  case BinaryOp::eq: return "==";
  case BinaryOp::ne: return "!=";
  case BinaryOp::lt: return "<";
  case BinaryOp::le: return "<=";
  case BinaryOp::gt: return ">";
  case BinaryOp::ge: return ">=";
  case BinaryOp::logical_and: return "&&";
  case BinaryOp::logical_or: return "||";
  }
  return "?";
}

bool is_constructor_name(std::string_view name) {
  return name == "yes" || name == "no" || name == "ok" || name == "error";
}

bool is_reserved_name(std::string_view name) {
  return is_constructor_name(name) || name == "eof" || name == "stdin" || name == "stdout";
}

ParseError::ParseError(Span where_, std::string expected_, std::string found_)
    : Error(std::to_string(where_.line) + ":" + std::to_string(where_.col) + ": expected " +
            expected_ + ", found " + found_),
      where(where_), expected(std::move(expected_)), found(std::move(found_)) {}

namespace {

std::string describe(const Token& t) {
  switch (t.kind) {
  case TokenKind::ident: return "identifier '" + t.text + "'";
  case TokenKind::int_lit: return "integer " + t.text;
  case TokenKind::string_lit: return "string " + escape_string(t.text);
  case TokenKind::char_lit: return "character " + escape_char(t.char_value);
  default: return std::string(token_name(t.kind));
  }
}

class Parser {
public:
  explicit Parser(std::span<const Token> tokens) : toks_(tokens) {}

  Program program() {
    Program prog;
    while (!at_end()) prog.procedures.push_back(procedure());
    return prog;
  }

private:
  std::span<const Token> toks_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
  }
  bool check(TokenKind kind, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->kind == kind;
  }
  bool accept(TokenKind kind) {
    if (!check(kind)) return false;
    ++pos_;
    return true;
  }
  Span here() const {
    if (!at_end()) return toks_[pos_].span;
    if (toks_.empty()) return {1, 1};
    return toks_.back().span;
  }

  [[noreturn]] void fail(std::string expected) const {
    throw ParseError(here(), std::move(expected), at_end() ? "end of input" : describe(toks_[pos_]));
  }

  const Token& expect(TokenKind kind, std::string_view what = {}) {
    if (!check(kind)) fail(what.empty() ? std::string(token_name(kind)) : std::string(what));
    return toks_[pos_++];
  }

  Procedure procedure() {
    Procedure proc;
    proc.span = expect(TokenKind::kw_proc, "'proc'").span;
    proc.name = expect(TokenKind::ident, "identifier").text;
    expect(TokenKind::lparen);
    if (!check(TokenKind::rparen)) {
      do {
        proc.params.push_back(expect(TokenKind::ident, "identifier").text);
      } while (accept(TokenKind::comma));
    }
    expect(TokenKind::rparen);
    proc.body = block(&proc.end_span);
    return proc;
  }

  Block block(Span* closing = nullptr) {
    expect(TokenKind::lbrace);
    Block stmts;
    while (!check(TokenKind::rbrace)) {
      if (at_end()) fail("'}'");
      stmts.push_back(statement());
    }
    if (closing != nullptr) *closing = here();
    expect(TokenKind::rbrace);
    return stmts;
  }

  bool at_call() const {
    return check(TokenKind::ident) && check(TokenKind::lparen, 1) &&
           !is_constructor_name(peek()->text);
  }

  void call_tail(Stmt& s) {
    const Token& name = expect(TokenKind::ident, "identifier");
    s.callee = name.text;
    s.callee_span = name.span;
    expect(TokenKind::lparen);
    if (!check(TokenKind::rparen)) {
      do {
        s.args.push_back(expr());
      } while (accept(TokenKind::comma));
    }
    expect(TokenKind::rparen);
  }

  Stmt statement() {
    Stmt s;
    s.span = here();
    if (accept(TokenKind::kw_let)) {
      do {
        const Token& t = expect(TokenKind::ident, "identifier");
        s.targets.push_back(Target{t.text, t.span, -1});
      } while (accept(TokenKind::comma));
      expect(TokenKind::eq);
      if (at_call()) {
        s.kind = Stmt::Kind::call;
        call_tail(s);
      } else {
        if (s.targets.size() != 1) fail("call (multiple targets need a call)");
        s.kind = Stmt::Kind::let;
        s.value = expr();
      }
      expect(TokenKind::semi);
    } else if (at_call()) {
      s.kind = Stmt::Kind::call;
      call_tail(s);
      expect(TokenKind::semi);
    } else if (accept(TokenKind::kw_if)) {
      s.kind = Stmt::Kind::if_;
      s.value = expr();
      s.then_block = block();
      if (accept(TokenKind::kw_else)) {
        s.has_else = true;
        if (check(TokenKind::kw_if)) {
          s.else_block.push_back(statement());
        } else {
          s.else_block = block();
        }
      }
    } else if (accept(TokenKind::kw_match)) {
      s.kind = Stmt::Kind::match;
      s.value = expr();
      expect(TokenKind::lbrace);
      while (!check(TokenKind::rbrace)) {
        if (at_end()) fail("'}'");
        StmtArm arm;
        arm.pattern = pattern();
        expect(TokenKind::arrow);
        arm.body = block();
        accept(TokenKind::comma);
        s.arms.push_back(std::move(arm));
      }
      expect(TokenKind::rbrace);
      if (s.arms.empty()) fail("match arm");
    } else if (accept(TokenKind::kw_return)) {
      s.kind = Stmt::Kind::return_;
      if (!check(TokenKind::semi)) {
        do {
          s.results.push_back(expr());
        } while (accept(TokenKind::comma));
      }
      expect(TokenKind::semi);
    } else {
      fail("statement");
    }
    return s;
  }

  Pattern pattern() {
    Pattern p;
    p.span = here();
    const Token* t = peek();
    if (t == nullptr) fail("pattern");
    switch (t->kind) {
    case TokenKind::int_lit:
      p.kind = Pattern::Kind::literal;
      p.literal = Value(t->int_value);
      ++pos_;
      return p;
    case TokenKind::minus:
      ++pos_;
      p.kind = Pattern::Kind::literal;
      p.literal = Value(-expect(TokenKind::int_lit, "integer literal").int_value);
      return p;
    case TokenKind::char_lit:
      p.kind = Pattern::Kind::literal;
      p.literal = Value::character(t->char_value);
      ++pos_;
      return p;
    case TokenKind::string_lit:
      p.kind = Pattern::Kind::literal;
      p.literal = Value(t->text);
      ++pos_;
      return p;
    case TokenKind::kw_true:
    case TokenKind::kw_false:
      p.kind = Pattern::Kind::literal;
      p.literal = Value(t->kind == TokenKind::kw_true);
      ++pos_;
      return p;
    case TokenKind::lparen:
      ++pos_;
      expect(TokenKind::rparen);
      p.kind = Pattern::Kind::literal;
      p.literal = Value(Unit{});
      return p;
    case TokenKind::ident: break;
    default: fail("pattern");
    }
    std::string name = t->text;
    ++pos_;
    if (name == "_") {
      p.kind = Pattern::Kind::wildcard;
    } else if (name == "eof") {
      p.kind = Pattern::Kind::literal;
      p.literal = Value::eof();
    } else if (is_constructor_name(name)) {
      p.kind = Pattern::Kind::constructor;
      p.name = name;
      if (accept(TokenKind::lparen)) {
        do {
          p.args.push_back(pattern());
        } while (accept(TokenKind::comma));
        expect(TokenKind::rparen);
      }
    } else {
      p.kind = Pattern::Kind::bind;
      p.name = name;
    }
    return p;
  }

  static Expr binary(BinaryOp op, Expr lhs, Expr rhs, Span span) {
    Expr e;
    e.kind = Expr::Kind::binary;
    e.span = span;
    e.binary_op = op;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
  }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (check(TokenKind::oror)) {
      Span s = here();
      ++pos_;
      lhs = binary(BinaryOp::logical_or, std::move(lhs), and_expr(), s);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = cmp_expr();
    while (check(TokenKind::andand)) {
      Span s = here();
      ++pos_;
      lhs = binary(BinaryOp::logical_and, std::move(lhs), cmp_expr(), s);
    }
    return lhs;
  }

  Expr cmp_expr() {
    Expr lhs = add_expr();
    static constexpr std::array<std::pair<TokenKind, BinaryOp>, 6> ops{{
        {TokenKind::eqeq, BinaryOp::eq},
        {TokenKind::neq, BinaryOp::ne},
        {TokenKind::lt, BinaryOp::lt},
        {TokenKind::le, BinaryOp::le},
        {TokenKind::gt, BinaryOp::gt},
        {TokenKind::ge, BinaryOp::ge},
    }};
    for (auto [kind, op] : ops) {
      if (check(kind)) {
        Span s = here();
        ++pos_;
        return binary(op, std::move(lhs), add_expr(), s);
      }
    }
    return lhs;
  }

  Expr add_expr() {
    Expr lhs = mul_expr();
    while (true) {
      BinaryOp op;
      if (check(TokenKind::plus)) op = BinaryOp::add;
      else if (check(TokenKind::minus)) op = BinaryOp::sub;
      else if (check(TokenKind::plusplus)) op = BinaryOp::concat;
      else break;
      Span s = here();
      ++pos_;
      lhs = binary(op, std::move(lhs), mul_expr(), s);
    }
    return lhs;
  }

  Expr mul_expr() {
    Expr lhs = unary_expr();
    while (true) {
      BinaryOp op;
      if (check(TokenKind::star)) op = BinaryOp::mul;
      else if (check(TokenKind::slash)) op = BinaryOp::div;
      else if (check(TokenKind::percent)) op = BinaryOp::mod;
      else break;
      Span s = here();
      ++pos_;
      lhs = binary(op, std::move(lhs), unary_expr(), s);
    }
    return lhs;
  }

  Expr unary_expr() {
    if (check(TokenKind::minus) || check(TokenKind::bang)) {
      Expr e;
      e.kind = Expr::Kind::unary;
      e.span = here();
      e.unary_op = check(TokenKind::minus) ? UnaryOp::negate : UnaryOp::logical_not;
      ++pos_;
      e.operands.push_back(unary_expr());
      return e;
    }
    return primary();
  }

  Expr literal(Value v, Span span) {
    Expr e;
    e.kind = Expr::Kind::literal;
    e.span = span;
    e.literal = std::move(v);
    return e;
  }

  Expr primary() {
    const Token* t = peek();
    if (t == nullptr) fail("expression");
    Span span = t->span;
    switch (t->kind) {
    case TokenKind::int_lit: ++pos_; return literal(Value(t->int_value), span);
    case TokenKind::char_lit: ++pos_; return literal(Value::character(t->char_value), span);
    case TokenKind::string_lit: ++pos_; return literal(Value(t->text), span);
    case TokenKind::kw_true: ++pos_; return literal(Value(true), span);
    case TokenKind::kw_false: ++pos_; return literal(Value(false), span);
    case TokenKind::lparen: {
      ++pos_;
      if (accept(TokenKind::rparen)) return literal(Value(Unit{}), span);
      Expr inner = expr();
      expect(TokenKind::rparen);
      return inner;
    }
    case TokenKind::kw_match: {
      ++pos_;
      Expr e;
      e.kind = Expr::Kind::match;
      e.span = span;
      e.operands.push_back(expr());
      expect(TokenKind::lbrace);
      while (!check(TokenKind::rbrace)) {
        if (at_end()) fail("'}'");
        ExprArm arm;
        arm.pattern = pattern();
        expect(TokenKind::arrow);
        arm.body = expr();
        e.arms.push_back(std::move(arm));
        if (!accept(TokenKind::comma)) break;
      }
      expect(TokenKind::rbrace);
      if (e.arms.empty()) fail("match arm");
      return e;
    }
    case TokenKind::ident: break;
    default: fail("expression");
    }
    std::string name = t->text;
    ++pos_;
    if (name == "eof") return literal(Value::eof(), span);
    if (name == "stdin") return literal(Value::handle(0), span);
    if (name == "stdout") return literal(Value::handle(1), span);
    if (is_constructor_name(name)) {
      Expr e;
      e.kind = Expr::Kind::construct;
      e.span = span;
      e.name = name;
      if (accept(TokenKind::lparen)) {
        do {
          e.operands.push_back(expr());
        } while (accept(TokenKind::comma));
        expect(TokenKind::rparen);
      }
      return e;
    }
    if (check(TokenKind::lparen)) {
      throw ParseError(span, "expression (calls are statements: `let x = " + name + "(...);`)",
                       "call to '" + name + "'");
    }
    Expr e;
    e.kind = Expr::Kind::var;
    e.span = span;
    e.name = name;
    return e;
  }
};

// ---------------------------------------------------------------- printing

class Printer {
public:
  std::string out;

  void program(const Program& p) {
    for (std::size_t i = 0; i < p.procedures.size(); ++i) {
      if (i > 0) out += "\n";
      procedure(p.procedures[i]);
    }
  }

private:
  int indent_ = 0;

  void line_start() { out.append(static_cast<std::size_t>(indent_) * 4, ' '); }

  void procedure(const Procedure& proc) {
    out += "proc " + proc.name + "(";
    for (std::size_t i = 0; i < proc.params.size(); ++i) {
      if (i > 0) out += ", ";
      out += proc.params[i];
    }
    out += ") ";
    block(proc.body);
    out += "\n";
  }

  void block(const Block& b) {
    out += "{\n";
    ++indent_;
    for (const Stmt& s : b) statement(s);
    --indent_;
    line_start();
    out += "}";
  }

  void exprs(const std::vector<Expr>& es) {
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (i > 0) out += ", ";
      expr(es[i]);
    }
  }

  void statement(const Stmt& s) {
    line_start();
    statement_body(s);
    out += "\n";
  }

  void statement_body(const Stmt& s) {
    switch (s.kind) {
    case Stmt::Kind::let:
      out += "let " + s.targets[0].name + " = ";
      expr(s.value);
      out += ";";
      break;
    case Stmt::Kind::call:
      if (!s.targets.empty()) {
        out += "let ";
        for (std::size_t i = 0; i < s.targets.size(); ++i) {
          if (i > 0) out += ", ";
          out += s.targets[i].name;
        }
        out += " = ";
      }
      out += s.callee + "(";
      exprs(s.args);
      out += ");";
      break;
    case Stmt::Kind::if_:
      out += "if ";
      expr(s.value);
      out += " ";
      block(s.then_block);
      if (s.has_else) {
        out += " else ";
        if (s.else_block.size() == 1 && s.else_block[0].kind == Stmt::Kind::if_) {
          statement_body(s.else_block[0]);
        } else {
          block(s.else_block);
        }
      }
      break;
    case Stmt::Kind::match:
      out += "match ";
      expr(s.value);
      out += " {\n";
      ++indent_;
      for (const StmtArm& arm : s.arms) {
        line_start();
        pattern(arm.pattern);
        out += " => ";
        block(arm.body);
        out += "\n";
      }
      --indent_;
      line_start();
      out += "}";
      break;
    case Stmt::Kind::return_:
      out += "return";
      if (!s.results.empty()) {
        out += " ";
        exprs(s.results);
      }
      out += ";";
      break;
    }
  }

  void pattern(const Pattern& p) {
    switch (p.kind) {
    case Pattern::Kind::wildcard: out += "_"; break;
    case Pattern::Kind::bind: out += p.name; break;
    case Pattern::Kind::literal: out += render(p.literal); break;
    case Pattern::Kind::constructor:
      out += p.name;
      if (!p.args.empty()) {
        out += "(";
        for (std::size_t i = 0; i < p.args.size(); ++i) {
          if (i > 0) out += ", ";
          pattern(p.args[i]);
        }
        out += ")";
      }
      break;
    }
  }

  void expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::literal:
      if (const auto* h = e.literal.get_if<Handle>()) {
        out += h->id == 0 ? "stdin" : "stdout";
      } else if (const auto* i = e.literal.get_if<std::int64_t>(); i != nullptr && *i < 0) {
        out += "(" + render(e.literal) + ")";
      } else {
        out += render(e.literal);
      }
      break;
    case Expr::Kind::var: out += e.name; break;
    case Expr::Kind::unary:
      out += op_symbol(e.unary_op);
      expr(e.operands[0]);
      break;
    case Expr::Kind::binary:
      out += "(";
      expr(e.operands[0]);
      out += " ";
      out += op_symbol(e.binary_op);
      out += " ";
      expr(e.operands[1]);
      out += ")";
      break;
    case Expr::Kind::construct:
      out += e.name;
      if (!e.operands.empty()) {
        out += "(";
        exprs(e.operands);
        out += ")";
      }
      break;
    case Expr::Kind::match:
      out += "match ";
      expr(e.operands[0]);
      out += " { ";
      for (std::size_t i = 0; i < e.arms.size(); ++i) {
        if (i > 0) out += ", ";
        pattern(e.arms[i].pattern);
        out += " => ";
        expr(e.arms[i].body);
      }
      out += " }";
      break;
    }
  }
};

// ---------------------------------------------------------------- dumping

class Dumper {
public:
  std::string out;

  void program(const Program& p) {
    for (const Procedure& proc : p.procedures) {
      out += "(proc " + proc.name + " (";
      for (const auto& param : proc.params) out += " " + param;
      out += ") ";
      block(proc.body);
      out += ")";
    }
  }

private:
  void block(const Block& b) {
    out += "(block";
    for (const Stmt& s : b) {
      out += " ";
      stmt(s);
    }
    out += ")";
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
    case Stmt::Kind::let:
      out += "(let " + s.targets[0].name + " ";
      expr(s.value);
      out += ")";
      break;
    case Stmt::Kind::call:
      out += "(call " + s.callee + " (";
      for (const auto& t : s.targets) out += " " + t.name;
      out += ")";
      for (const auto& a : s.args) {
        out += " ";
        expr(a);
      }
      out += ")";
      break;
    case Stmt::Kind::if_:
      out += "(if ";
      expr(s.value);
      out += " ";
      block(s.then_block);
      if (s.has_else) {
        out += " ";
        block(s.else_block);
      }
      out += ")";
      break;
    case Stmt::Kind::match:
      out += "(match ";
      expr(s.value);
      for (const auto& arm : s.arms) {
        out += " (arm ";
        pattern(arm.pattern);
        out += " ";
        block(arm.body);
        out += ")";
      }
      out += ")";
      break;
    case Stmt::Kind::return_:
      out += "(return";
      for (const auto& r : s.results) {
        out += " ";
        expr(r);
      }
      out += ")";
      break;
    }
  }

  void pattern(const Pattern& p) {
    switch (p.kind) {
    case Pattern::Kind::wildcard: out += "_"; break;
    case Pattern::Kind::bind: out += "(bind " + p.name + ")"; break;
    case Pattern::Kind::literal: out += "(lit " + render(p.literal) + ")"; break;
    case Pattern::Kind::constructor:
      out += "(ctor " + p.name;
      for (const auto& a : p.args) {
        out += " ";
        pattern(a);
      }
      out += ")";
      break;
    }
  }

  void expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::literal: out += "(lit " + render(e.literal) + ")"; break;
    case Expr::Kind::var: out += "(var " + e.name + ")"; break;
    case Expr::Kind::unary:
      out += "(" + std::string(op_symbol(e.unary_op)) + " ";
      expr(e.operands[0]);
      out += ")";
      break;
    case Expr::Kind::binary:
      out += "(" + std::string(op_symbol(e.binary_op)) + " ";
      expr(e.operands[0]);
      out += " ";
      expr(e.operands[1]);
      out += ")";
      break;
    case Expr::Kind::construct:
      out += "(ctor " + e.name;
      for (const auto& a : e.operands) {
        out += " ";
        expr(a);
      }
      out += ")";
      break;
    case Expr::Kind::match:
      out += "(match ";
      expr(e.operands[0]);
      for (const auto& arm : e.arms) {
        out += " (arm ";
        pattern(arm.pattern);
        out += " ";
        expr(arm.body);
        out += ")";
      }
      out += ")";
      break;
    }
  }
};

} // namespace

Program parse_program(std::span<const Token> tokens) { return Parser(tokens).program(); }

Program parse_source(std::string_view source) {
  auto tokens = tokenize(source);
  return parse_program(tokens);
}

std::string print_program(const Program& program) {
  Printer p;
  p.program(program);
  return p.out;
}

std::string dump_ast(const Program& program) {
  Dumper d;
  d.program(program);
  return d.out;
}

} // namespace tardi::lang
