#include "tardi/lang/lexer.hpp"

#include <cctype>
#include <charconv>
#include <unordered_map>

namespace tardi::lang {

std::string_view token_name(TokenKind kind) {
  switch (kind) {
  case TokenKind::kw_proc: return "'proc'";
  case TokenKind::kw_let: return "'let'";
  case TokenKind::kw_if: return "'if'";
  case TokenKind::kw_else: return "'else'";
  case TokenKind::kw_match: return "'match'";
  case TokenKind::kw_return: return "'return'";
  case TokenKind::kw_true: return "'true'";
  case TokenKind::kw_false: return "'false'";
  case TokenKind::ident: return "identifier";
  case TokenKind::int_lit: return "integer literal";
  case TokenKind::char_lit: return "character literal";
  case TokenKind::string_lit: return "string literal";
  case TokenKind::lparen: return "'('";
  case TokenKind::rparen: return "')'";
  case TokenKind::lbrace: return "'{'";
  case TokenKind::rbrace: return "'}'";
  case TokenKind::comma: return "','";
  case TokenKind::semi: return "';'";
  case TokenKind::eq: return "'='";
  case TokenKind::arrow: return "'=>'";
  case TokenKind::plus: return "'+'";
  case TokenKind::plusplus: return "'++'";
  case TokenKind::minus: return "'-'";
  case TokenKind::star: return "'*'";
  case TokenKind::slash: return "'/'";
  case TokenKind::percent: return "'%'";
  case TokenKind::eqeq: return "'=='";
  case TokenKind::neq: return "'!='";
  case TokenKind::lt: return "'<'";
  case TokenKind::le: return "'<='";
  case TokenKind::gt: return "'>'";
  case TokenKind::ge: return "'>='";
  case TokenKind::andand: return "'&&'";
  case TokenKind::oror: return "'||'";
  case TokenKind::bang: return "'!'";
  }
  return "token";
}

LexError::LexError(Span where_, std::string message_)
    : Error(std::to_string(where_.line) + ":" + std::to_string(where_.col) + ": " + message_),
      where(where_), message(std::move(message_)) {}

namespace {

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    return out;
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
  }

  // Continuation bytes do not advance the column, so columns count scalars.
  char32_t bump_scalar() {
    std::size_t p = pos_;
    char32_t c = decode_utf8(src_, p);
    while (pos_ < p) bump();
    return c;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') bump();
      } else {
        break;
      }
    }
  }

  Token make(TokenKind kind, Span span, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) bump();
    return Token{kind, {}, 0, 0, span};
  }

  Token next() {
    Span span{line_, col_};
    char c = peek();
    if (is_ident_start(c)) return ident(span);
    if (is_digit(c)) return number(span);
    if (c == '"') return string(span);
    if (c == '\'') return character(span);
    switch (c) {
    case '(': return make(TokenKind::lparen, span, 1);
    case ')': return make(TokenKind::rparen, span, 1);
    case '{': return make(TokenKind::lbrace, span, 1);
    case '}': return make(TokenKind::rbrace, span, 1);
    case ',': return make(TokenKind::comma, span, 1);
    case ';': return make(TokenKind::semi, span, 1);
    case '*': return make(TokenKind::star, span, 1);
    case '/': return make(TokenKind::slash, span, 1);
    case '%': return make(TokenKind::percent, span, 1);
    case '-': return make(TokenKind::minus, span, 1);
    case '+':
      return peek(1) == '+' ? make(TokenKind::plusplus, span, 2) : make(TokenKind::plus, span, 1);
    case '=':
      if (peek(1) == '=') return make(TokenKind::eqeq, span, 2);
      if (peek(1) == '>') return make(TokenKind::arrow, span, 2);
      return make(TokenKind::eq, span, 1);
    case '!':
      return peek(1) == '=' ? make(TokenKind::neq, span, 2) : make(TokenKind::bang, span, 1);
    case '<':
      return peek(1) == '=' ? make(TokenKind::le, span, 2) : make(TokenKind::lt, span, 1);
    case '>':
      return peek(1) == '=' ? make(TokenKind::ge, span, 2) : make(TokenKind::gt, span, 1);
    case '&':
      if (peek(1) == '&') return make(TokenKind::andand, span, 2);
      break;
    case '|':
      if (peek(1) == '|') return make(TokenKind::oror, span, 2);
      break;
    default: break;
    }
    std::size_t p = pos_;
    char32_t bad = decode_utf8(src_, p);
    std::string shown;
    append_utf8(shown, bad);
    throw LexError(span, "illegal character '" + shown + "'");
  }

  Token ident(Span span) {
    std::size_t start = pos_;
    while (is_ident_char(peek())) bump();
    std::string text(src_.substr(start, pos_ - start));
    static const std::unordered_map<std::string_view, TokenKind> keywords = {
        {"proc", TokenKind::kw_proc},     {"let", TokenKind::kw_let},
        {"if", TokenKind::kw_if},         {"else", TokenKind::kw_else},
        {"match", TokenKind::kw_match},   {"return", TokenKind::kw_return},
        {"true", TokenKind::kw_true},     {"false", TokenKind::kw_false},
    };
    if (auto it = keywords.find(text); it != keywords.end()) return Token{it->second, text, 0, 0, span};
    return Token{TokenKind::ident, std::move(text), 0, 0, span};
  }

  Token number(Span span) {
    std::size_t start = pos_;
    while (is_digit(peek())) bump();
    if (is_ident_start(peek())) throw LexError(span, "malformed integer literal");
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc()) throw LexError(span, "integer literal out of range");
    return Token{TokenKind::int_lit, std::string(src_.substr(start, pos_ - start)), value, 0, span};
  }

  char32_t escape(Span literal_span) {
    Span esc{line_, col_};
    bump(); // backslash
    if (pos_ >= src_.size()) throw LexError(literal_span, "unterminated escape");
    char c = peek();
    bump();
    switch (c) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case '0': return '\0';
    case '\\': return '\\';
    case '\'': return '\'';
    case '"': return '"';
    case 'u': {
      if (peek() != '{') throw LexError(esc, "malformed unicode escape");
      bump();
      std::uint32_t code = 0;
      int digits = 0;
      while (std::isxdigit(static_cast<unsigned char>(peek()))) {
        char h = peek();
        code = code * 16 + static_cast<std::uint32_t>(
                               is_digit(h) ? h - '0' : (std::tolower(h) - 'a' + 10));
        ++digits;
        bump();
        if (digits > 6) throw LexError(esc, "malformed unicode escape");
      }
      if (digits == 0 || peek() != '}' || code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF))
        throw LexError(esc, "malformed unicode escape");
      bump();
      return static_cast<char32_t>(code);
    }
    default: throw LexError(esc, std::string("unknown escape '\\") + c + "'");
    }
  }

  Token string(Span span) {
    bump(); // opening quote
    std::string text;
    while (true) {
      if (pos_ >= src_.size() || peek() == '\n') throw LexError(span, "unterminated string");
      char c = peek();
      if (c == '"') {
        bump();
        break;
      }
      if (c == '\\') {
        append_utf8(text, escape(span));
      } else {
        append_utf8(text, bump_scalar());
      }
    }
    return Token{TokenKind::string_lit, std::move(text), 0, 0, span};
  }

  Token character(Span span) {
    bump(); // opening quote
    if (pos_ >= src_.size() || peek() == '\n' || peek() == '\'')
      throw LexError(span, "malformed character literal");
    char32_t value = peek() == '\\' ? escape(span) : bump_scalar();
    if (peek() != '\'') throw LexError(span, "unterminated character literal");
    bump();
    return Token{TokenKind::char_lit, {}, 0, value, span};
  }
};

} // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

} // namespace tardi::lang
