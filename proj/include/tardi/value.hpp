#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tardi {

/// Base class for every error raised by the toolchain.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Unit {
  bool operator==(const Unit&) const = default;
};

struct Eof {
  bool operator==(const Eof&) const = default;
};

struct Char {
  char32_t code = 0;
  bool operator==(const Char&) const = default;
};

/// Opaque stream reference. Programs may only compare handles for equality.
struct Handle {
  std::int64_t id = 0;
  bool operator==(const Handle&) const = default;
};

class Value;

/// Tagged constructor application: yes(v), no, ok, ok(v), error(s).
struct Variant {
  std::string tag;
  std::vector<Value> payload;
  bool operator==(const Variant&) const;
};

enum class ValueKind { unit, boolean, integer, character, string, eof, handle, variant };

class Value {
public:
  using Storage =
      std::variant<Unit, bool, std::int64_t, Char, std::string, Eof, Handle, Variant>;

  Value() : data_(Unit{}) {}
  Value(Unit u) : data_(u) {}
  Value(bool b) : data_(b) {}
  Value(std::int64_t i) : data_(i) {}
  Value(int i) : data_(static_cast<std::int64_t>(i)) {}
  Value(Char c) : data_(c) {}
  Value(std::string s) : data_(std::move(s)) {}
  Value(const char* s) : data_(std::string(s)) {}
  Value(Eof e) : data_(e) {}
  Value(Handle h) : data_(h) {}
  Value(Variant v) : data_(std::move(v)) {}

  static Value character(char32_t c) { return Value(Char{c}); }
  static Value handle(std::int64_t id) { return Value(Handle{id}); }
  static Value eof() { return Value(Eof{}); }
  static Value ok() { return Value(Variant{"ok", {}}); }
  static Value ok(Value v);
  static Value error(std::string message);
  static Value yes(Value v);
  static Value no() { return Value(Variant{"no", {}}); }

  ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(data_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(data_);
  }
  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&data_);
  }

  bool is_variant(std::string_view tag) const;

  const Storage& storage() const { return data_; }

  bool operator==(const Value& other) const { return data_ == other.data_; }

private:
  Storage data_;
};

std::string_view kind_name(ValueKind kind);

/// Renders a value in the language's literal syntax. Strings and chars are escaped.
std::string render(const Value& value);

/// Renders a list as `[a, b, c]`.
std::string render_list(std::span<const Value> values);

std::string escape_string(std::string_view text);
std::string escape_char(char32_t c);

/// UTF-8 helpers shared by the lexer, the backends and the string primitives.
void append_utf8(std::string& out, char32_t c);
/// Decodes one scalar starting at `pos`, advancing it. Returns U+FFFD on malformed input.
char32_t decode_utf8(std::string_view text, std::size_t& pos);
std::size_t utf8_length(std::string_view text);

} // namespace tardi
