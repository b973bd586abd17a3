#pragma once

#include "tardi/lang/ast.hpp"
#include "tardi/lang/lexer.hpp"

#include <span>
#include <string>

namespace tardi::lang {

class ParseError : public Error {
public:
  ParseError(Span where, std::string expected, std::string found);
  Span where;
  std::string expected;
  std::string found;
};

Program parse_program(std::span<const Token> tokens);

/// Convenience: tokenize + parse.
Program parse_source(std::string_view source);

/// Canonical source rendering. Binary expressions are fully parenthesized.
std::string print_program(const Program& program);

/// Span-free structural dump (S-expression). Two programs are structurally
/// identical iff their dumps are equal.
std::string dump_ast(const Program& program);

} // namespace tardi::lang
