#include "tardi/io/world.hpp"

#include <array>
#include <charconv>
#include <limits>

namespace tardi::io {

namespace {

const std::array<PrimitiveDescriptor, 12> kRegistry{{
    {"open_file", 2, 2, true},
    {"close_file", 1, 1, true},
    {"read_char", 1, 1, true},
    {"read_line", 1, 1, true},
    {"write_string", 2, 1, true},
    {"string_length", 1, 1, false},
    {"int_to_string", 1, 1, false},
    {"string_to_int", 1, 1, false},
    {"char_to_string", 1, 1, false},
    {"char_code", 1, 1, false},
    {"string_char_at", 2, 1, false},
    {"substring", 3, 1, false},
}};

[[noreturn]] void type_fault(std::string_view prim, std::size_t index, std::string_view expected,
                             const Value& got) {
  throw PrimitiveFault(std::string(prim) + ": argument " + std::to_string(index + 1) + " must be " +
                       std::string(expected) + ", got " + render(got));
}

std::int64_t handle_arg(std::string_view prim, std::span<const Value> in, std::size_t i) {
  if (const auto* h = in[i].get_if<Handle>()) return h->id;
  type_fault(prim, i, "a handle", in[i]);
}

const std::string& string_arg(std::string_view prim, std::span<const Value> in, std::size_t i) {
  if (const auto* s = in[i].get_if<std::string>()) return *s;
  type_fault(prim, i, "a string", in[i]);
}

std::int64_t int_arg(std::string_view prim, std::span<const Value> in, std::size_t i) {
  if (const auto* n = in[i].get_if<std::int64_t>()) return *n;
  type_fault(prim, i, "an int", in[i]);
}

char32_t char_arg(std::string_view prim, std::span<const Value> in, std::size_t i) {
  if (const auto* c = in[i].get_if<Char>()) return c->code;
  type_fault(prim, i, "a char", in[i]);
}

// Byte offset of the scalar with index `index`, or npos past the end.
std::size_t scalar_offset(std::string_view s, std::int64_t index) {
  std::size_t pos = 0;
  for (std::int64_t i = 0; i < index; ++i) {
    if (pos >= s.size()) return std::string_view::npos;
    decode_utf8(s, pos);
  }
  return pos;
}

} // namespace

std::span<const PrimitiveDescriptor> registry() { return kRegistry; }

const PrimitiveDescriptor* find_primitive(std::string_view name) {
  for (const auto& d : kRegistry) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

void EffectsTrace::append(ActionNumber action_number, std::string name, std::vector<Value> inputs,
                          std::vector<Value> outputs) {
  records_.push_back(TraceRecord{records_.size(), action_number, std::move(name), std::move(inputs),
                                 std::move(outputs)});
}

std::string dump_trace(const EffectsTrace& trace) {
  std::string out;
  for (const TraceRecord& r : trace.records()) {
    out += std::to_string(r.seq);
    out += '\t';
    out += std::to_string(r.action_number);
    out += '\t';
    out += r.name;
    out += '\t';
    out += render_list(r.inputs);
    out += '\t';
    out += render_list(r.outputs);
    out += '\n';
  }
  return out;
}

World::World(std::unique_ptr<IoBackend> backend) : backend_(std::move(backend)) {}

std::vector<Value> World::perform(const PrimitiveDescriptor& d, std::span<const Value> in,
                                  ActionNumber action_number) {
  if (!d.effectful) return call_pure(d, in);
  if (in.size() != static_cast<std::size_t>(d.n_inputs)) {
    throw PrimitiveFault(d.name + ": expected " + std::to_string(d.n_inputs) + " inputs");
  }

  std::vector<Value> out;
  if (d.name == "open_file") {
    const auto& path = string_arg(d.name, in, 0);
    const auto& mode = string_arg(d.name, in, 1);
    OpenResult r = backend_->open(path, mode);
    out = {std::move(r.code), std::move(r.handle)};
  } else if (d.name == "close_file") {
    out = {backend_->close(handle_arg(d.name, in, 0))};
  } else if (d.name == "read_char") {
    out = {backend_->read_char(handle_arg(d.name, in, 0))};
  } else if (d.name == "read_line") {
    out = {backend_->read_line(handle_arg(d.name, in, 0))};
  } else if (d.name == "write_string") {
    std::int64_t h = handle_arg(d.name, in, 0);
    out = {backend_->write_string(h, string_arg(d.name, in, 1))};
  } else {
    throw PrimitiveFault("no backend operation for " + d.name);
  }
  trace_.append(action_number, d.name, std::vector<Value>(in.begin(), in.end()), out);
  return out;
}

std::vector<Value> call_pure(const PrimitiveDescriptor& d, std::span<const Value> in) {
  if (in.size() != static_cast<std::size_t>(d.n_inputs)) {
    throw PrimitiveFault(d.name + ": expected " + std::to_string(d.n_inputs) + " inputs");
  }
  const std::string& name = d.name;
  if (name == "string_length") {
    return {Value(static_cast<std::int64_t>(utf8_length(string_arg(name, in, 0))))};
  }
  if (name == "int_to_string") return {Value(std::to_string(int_arg(name, in, 0)))};
  if (name == "string_to_int") {
    const std::string& s = string_arg(name, in, 0);
    std::int64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last) return {Value::no()};
    return {Value::yes(Value(v))};
  }
  if (name == "char_to_string") {
    std::string s;
    append_utf8(s, char_arg(name, in, 0));
    return {Value(std::move(s))};
  }
  if (name == "char_code") return {Value(static_cast<std::int64_t>(char_arg(name, in, 0)))};
  if (name == "string_char_at") {
    const std::string& s = string_arg(name, in, 0);
    std::int64_t index = int_arg(name, in, 1);
    if (index < 0) return {Value::no()};
    std::size_t pos = scalar_offset(s, index);
    if (pos == std::string_view::npos || pos >= s.size()) return {Value::no()};
    return {Value::yes(Value::character(decode_utf8(s, pos)))};
  }
  if (name == "substring") {
    const std::string& s = string_arg(name, in, 0);
    std::int64_t start = int_arg(name, in, 1);
    std::int64_t len = int_arg(name, in, 2);
    if (start < 0 || len < 0) return {Value(std::string())};
    std::size_t from = scalar_offset(s, start);
    if (from == std::string_view::npos) return {Value(std::string())};
    std::size_t to = from;
    for (std::int64_t i = 0; i < len && to < s.size(); ++i) decode_utf8(s, to);
    return {Value(s.substr(from, to - from))};
  }
  throw PrimitiveFault(name + " is not a pure primitive");
}

} // namespace tardi::io
