#pragma once

#include "tardi/value.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tardi::lang {

/// 1-based source position.
struct Span {
  int line = 0;
  int col = 0;
  bool operator==(const Span&) const = default;
};

enum class TokenKind {
  // keywords
  kw_proc,
  kw_let,
  kw_if,
  kw_else,
  kw_match,
  kw_return,
  kw_true,
  kw_false,
  // literals and names
  ident,
  int_lit,
  char_lit,
  string_lit,
  // punctuation
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  semi,
  eq,      // =
  arrow,   // =>
  plus,
  plusplus,
  minus,
  star,
  slash,
  percent,
  eqeq,
  neq,
  lt,
  le,
  gt,
  ge,
  andand,
  oror,
  bang,
};

std::string_view token_name(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;       // identifier name or decoded string literal
  std::int64_t int_value = 0;
  char32_t char_value = 0;
  Span span;
};

class LexError : public Error {
public:
  LexError(Span where, std::string message);
  Span where;
  std::string message;
};

/// Splits source text into tokens. Whitespace and `//` comments are dropped.
std::vector<Token> tokenize(std::string_view source);

} // namespace tardi::lang
