#pragma once

#include "tardi/debugger/session.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <variant>

namespace tardi::frontend {

using json = nlohmann::json;

/// A line that is not a well-formed protocol message.
class ProtocolError : public Error {
public:
  using Error::Error;
};

struct Request {
  std::int64_t id = 0;
  std::string cmd;
  json args = json::object();
  bool operator==(const Request&) const = default;
};

struct Response {
  std::optional<std::int64_t> id; // null when the request could not be read
  bool ok = true;
  json body = json::object();
  std::string error;   // short code: parse, bad-request, unknown-command, bad-depth, ...
  std::string message; // human-readable detail
  bool operator==(const Response&) const = default;
};

struct Event {
  std::string type;
  json payload = json::object();
  bool operator==(const Event&) const = default;
};

using ProtocolMessage = std::variant<Request, Response, Event>;

json to_json(const ProtocolMessage& message);
ProtocolMessage message_from_json(const json& j);
/// One line of NDJSON, without the trailing newline.
std::string encode(const ProtocolMessage& message);
ProtocolMessage decode(std::string_view line);

json value_to_json(const Value& v);
Value value_from_json(const json& j);

json span_to_json(const lang::Span& s);
json record_to_json(const tabling::IoActionRecord& r);
json report_to_json(const debugger::RetrySafetyReport& r);
Event event_to_message(const debugger::DebugEvent& ev);

} // namespace tardi::frontend
