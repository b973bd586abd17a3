#include "tardi/frontend/protocol.hpp"

namespace tardi::frontend {

namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("missing field ") + key);
  return *it;
}

json values_to_json(const std::vector<Value>& values) {
  json out = json::array();
  for (const Value& v : values) out.push_back(value_to_json(v));
  return out;
}

json location_to_json(const debugger::Location& loc) {
  return {{"proc", loc.proc}, {"line", loc.span.line}, {"col", loc.span.col}};
}

} // namespace

json value_to_json(const Value& v) {
  json out{{"kind", kind_name(v.kind())}};
  switch (v.kind()) {
  case ValueKind::unit:
  case ValueKind::eof: break;
  case ValueKind::boolean: out["value"] = v.as<bool>(); break;
  case ValueKind::integer: out["value"] = v.as<std::int64_t>(); break;
  case ValueKind::character: out["value"] = static_cast<std::uint32_t>(v.as<Char>().code); break;
  case ValueKind::string: out["value"] = v.as<std::string>(); break;
  case ValueKind::handle: out["value"] = v.as<Handle>().id; break;
  case ValueKind::variant:
    out["tag"] = v.as<Variant>().tag;
    out["payload"] = values_to_json(v.as<Variant>().payload);
    break;
  }
  return out;
}

Value value_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("value must be an object");
  const std::string kind = require(j, "kind").get<std::string>();
  try {
    if (kind == "unit") return Value(Unit{});
    if (kind == "eof") return Value::eof();
    if (kind == "bool") return Value(require(j, "value").get<bool>());
    if (kind == "int") return Value(require(j, "value").get<std::int64_t>());
    if (kind == "char") return Value::character(static_cast<char32_t>(require(j, "value").get<std::uint32_t>()));
    if (kind == "string") return Value(require(j, "value").get<std::string>());
    if (kind == "handle") return Value::handle(require(j, "value").get<std::int64_t>());
    if (kind == "variant") {
      Variant var{require(j, "tag").get<std::string>(), {}};
      for (const json& p : require(j, "payload")) var.payload.push_back(value_from_json(p));
      return Value(std::move(var));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad ") + kind + " value: " + e.what());
  }
  throw ProtocolError("unknown value kind " + kind);
}

json span_to_json(const lang::Span& s) { return {{"line", s.line}, {"col", s.col}}; }

json record_to_json(const tabling::IoActionRecord& r) {
  return {{"n", r.number},
          {"name", r.name},
          {"inputs", values_to_json(r.inputs)},
          {"outputs", values_to_json(r.outputs)},
          {"text", r.name + render_list(r.inputs) + " -> " + render_list(r.outputs)},
          {"replayed", r.replayed},
          {"tabled", r.tabled}};
}

json report_to_json(const debugger::RetrySafetyReport& r) {
  return {{"target_depth", r.target_depth},
          {"entry_counter", r.entry_counter},
          {"current_counter", r.current_counter},
          {"n_actions", r.n_actions_crossed},
          {"n_untabled", r.n_untabled},
          {"verdict", r.safe() ? "safe" : "unsafe"},
          {"reason", r.reason}};
}

Event event_to_message(const debugger::DebugEvent& ev) {
  using namespace debugger;
  return std::visit(
      [](const auto& e) -> Event {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, StoppedEvent>) {
          json p{{"reason", stop_reason_name(e.reason)}, {"location", location_to_json(e.location)},
                 {"depth", e.depth}};
          if (!e.detail.empty()) p["detail"] = e.detail;
          return {"stopped", p};
        } else if constexpr (std::is_same_v<T, IoActionEvent>) {
          return {"io_action", record_to_json(e.record)};
        } else if constexpr (std::is_same_v<T, WarningEvent>) {
          json p{{"text", e.text}, {"requires_confirmation", e.requires_confirmation}};
          if (e.report) p["report"] = report_to_json(*e.report);
          return {"warning", p};
        } else if constexpr (std::is_same_v<T, DivergenceEvent>) {
          return {"divergence",
                  {{"n", e.number},
                   {"recorded", {{"name", e.recorded_name}, {"inputs", values_to_json(e.recorded_inputs)}}},
                   {"attempted", {{"name", e.attempted_name}, {"inputs", values_to_json(e.attempted_inputs)}}},
                   {"text", e.description}}};
        } else if constexpr (std::is_same_v<T, ExitedEvent>) {
          return {"exited", {{"code", e.code}}};
        } else {
          return {"retried", {{"depth", e.depth}, {"counter", e.counter}, {"location", location_to_json(e.location)}}};
        }
      },
      ev);
}

json to_json(const ProtocolMessage& message) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Request>) {
          return {{"id", m.id}, {"cmd", m.cmd}, {"args", m.args}};
        } else if constexpr (std::is_same_v<T, Response>) {
          json out{{"id", m.id ? json(*m.id) : json(nullptr)}, {"ok", m.ok}};
          if (m.ok) {
            out["body"] = m.body;
          } else {
            out["error"] = m.error;
            if (!m.message.empty()) out["message"] = m.message;
          }
          return out;
        } else {
          return {{"type", m.type}, {"payload", m.payload}};
        }
      },
      message);
}

ProtocolMessage message_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  try {
    if (j.contains("cmd")) {
      Request r;
      r.id = require(j, "id").get<std::int64_t>();
      r.cmd = j["cmd"].get<std::string>();
      if (auto it = j.find("args"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw ProtocolError("args must be an object");
        r.args = *it;
      }
      return r;
    }
    if (j.contains("ok")) {
      Response r;
      const json& id = require(j, "id");
      if (!id.is_null()) r.id = id.get<std::int64_t>();
      r.ok = j["ok"].get<bool>();
      if (r.ok) {
        if (auto it = j.find("body"); it != j.end()) r.body = *it;
      } else {
        r.body = json::object();
        r.error = require(j, "error").get<std::string>();
        if (auto it = j.find("message"); it != j.end()) r.message = it->get<std::string>();
      }
      return r;
    }
    if (j.contains("type")) {
      Event e;
      e.type = j["type"].get<std::string>();
      if (auto it = j.find("payload"); it != j.end()) e.payload = *it;
      return e;
    }
  } catch (const json::exception& e) {
    throw ProtocolError(e.what());
  }
  throw ProtocolError("not a request, response or event");
}

std::string encode(const ProtocolMessage& message) {
  return to_json(message).dump(-1, ' ', false, json::error_handler_t::replace);
}

ProtocolMessage decode(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(e.what());
  }
  return message_from_json(j);
}

} // namespace tardi::frontend
