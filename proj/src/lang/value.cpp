#include "tardi/value.hpp"

#include <cstdio>

namespace tardi {

bool Variant::operator==(const Variant& other) const {
  return tag == other.tag && payload == other.payload;
}

Value Value::ok(Value v) { return Value(Variant{"ok", {std::move(v)}}); }
Value Value::error(std::string message) {
  return Value(Variant{"error", {Value(std::move(message))}});
}
Value Value::yes(Value v) { return Value(Variant{"yes", {std::move(v)}}); }

bool Value::is_variant(std::string_view tag) const {
  const auto* v = get_if<Variant>();
  return v != nullptr && v->tag == tag;
}

std::string_view kind_name(ValueKind kind) {
  switch (kind) {
  case ValueKind::unit: return "unit";
  case ValueKind::boolean: return "bool";
  case ValueKind::integer: return "int";
  case ValueKind::character: return "char";
  case ValueKind::string: return "string";
  case ValueKind::eof: return "eof";
  case ValueKind::handle: return "handle";
  case ValueKind::variant: return "variant";
  }
  return "?";
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  constexpr char32_t replacement = 0xFFFD;
  const auto lead = static_cast<unsigned char>(text[pos++]);
  if (lead < 0x80) return lead;
  int extra = 0;
  char32_t c = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    c = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    c = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    c = lead & 0x07;
  } else {
    return replacement;
  }
  for (int i = 0; i < extra; ++i) {
    if (pos >= text.size()) return replacement;
    const auto cont = static_cast<unsigned char>(text[pos]);
    if ((cont & 0xC0) != 0x80) return replacement;
    c = (c << 6) | (cont & 0x3F);
    ++pos;
  }
  return c;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); ++n) decode_utf8(text, pos);
  return n;
}

namespace {

void append_escaped(std::string& out, char32_t c, char32_t quote) {
  switch (c) {
  case '\n': out += "\\n"; return;
  case '\t': out += "\\t"; return;
  case '\r': out += "\\r"; return;
  case '\0': out += "\\0"; return;
  case '\\': out += "\\\\"; return;
  default: break;
  }
  if (c == quote) {
    out.push_back('\\');
    out.push_back(static_cast<char>(quote));
    return;
  }
  if (c < 0x20 || c == 0x7F) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "\\u{%X}", static_cast<unsigned>(c));
    out += buf;
    return;
  }
  append_utf8(out, c);
}

} // namespace

std::string escape_string(std::string_view text) {
  std::string out = "\"";
  for (std::size_t pos = 0; pos < text.size();) append_escaped(out, decode_utf8(text, pos), '"');
  out.push_back('"');
  return out;
}

std::string escape_char(char32_t c) {
  std::string out = "'";
  append_escaped(out, c, '\'');
  out.push_back('\'');
  return out;
}

std::string render(const Value& value) {
  struct Renderer {
    std::string operator()(Unit) const { return "()"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(Char c) const { return escape_char(c.code); }
    std::string operator()(const std::string& s) const { return escape_string(s); }
    std::string operator()(Eof) const { return "eof"; }
    std::string operator()(Handle h) const { return "handle(" + std::to_string(h.id) + ")"; }
    std::string operator()(const Variant& v) const {
      if (v.payload.empty()) return v.tag;
      std::string out = v.tag + "(";
      for (std::size_t i = 0; i < v.payload.size(); ++i) {
        if (i > 0) out += ", ";
        out += render(v.payload[i]);
      }
      return out + ")";
    }
  };
  return std::visit(Renderer{}, value.storage());
}

std::string render_list(std::span<const Value> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += render(values[i]);
  }
  return out + "]";
}

} // namespace tardi
