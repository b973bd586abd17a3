#pragma once

#include "tardi/lang/lexer.hpp"
#include "tardi/value.hpp"

#include <string>
#include <vector>

namespace tardi::lang {

enum class UnaryOp { negate, logical_not };
enum class BinaryOp { add, sub, mul, div, mod, concat, eq, ne, lt, le, gt, ge, logical_and, logical_or };

std::string_view op_symbol(UnaryOp op);
std::string_view op_symbol(BinaryOp op);

/// Where a resolved variable lives. Frame slots are single-assignment locals;
/// scoped slots index the evaluation stack of an enclosing match expression.
enum class Storage { unresolved, frame, scoped };

struct Pattern {
  enum class Kind { wildcard, bind, literal, constructor };
  Kind kind = Kind::wildcard;
  Span span;
  std::string name; // bound variable or constructor tag
  Value literal;    // literal patterns, including eof
  std::vector<Pattern> args;
  Storage storage = Storage::unresolved;
  int slot = -1;
};

struct ExprArm;

struct Expr {
  enum class Kind { literal, var, unary, binary, construct, match };
  Kind kind = Kind::literal;
  Span span;
  Value literal;
  std::string name; // variable name or constructor tag
  UnaryOp unary_op = UnaryOp::negate;
  BinaryOp binary_op = BinaryOp::add;
  std::vector<Expr> operands; // unary: 1, binary: 2, construct: payload, match: scrutinee
  std::vector<ExprArm> arms;
  Storage storage = Storage::unresolved;
  int slot = -1;
};

struct ExprArm {
  Pattern pattern;
  Expr body;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Target {
  std::string name; // "_" discards the value
  Span span;
  int slot = -1;
};

struct StmtArm {
  Pattern pattern;
  Block body;
};

enum class CalleeKind { unresolved, user, primitive };

struct Stmt {
  enum class Kind { let, call, if_, match, return_ };
  Kind kind = Kind::let;
  Span span;

  std::vector<Target> targets; // let / call
  Expr value;                  // let value, if condition, match scrutinee

  std::string callee;
  Span callee_span;
  std::vector<Expr> args;
  CalleeKind callee_kind = CalleeKind::unresolved;
  int callee_index = -1; // procedure index or registry index

  Block then_block;
  Block else_block;
  bool has_else = false;

  std::vector<StmtArm> arms;
  std::vector<Expr> results; // return values
};

struct Procedure {
  std::string name;
  Span span;
  Span end_span; // closing brace; location of the implicit return
  std::vector<std::string> params;
  Block body;

  // Filled in by the checker.
  std::vector<std::string> slot_names; // params occupy the first slots
  int n_outputs = 0;
};

struct Program {
  std::vector<Procedure> procedures;
  std::string entry = "main";
};

bool is_constructor_name(std::string_view name);
bool is_reserved_name(std::string_view name);

} // namespace tardi::lang
