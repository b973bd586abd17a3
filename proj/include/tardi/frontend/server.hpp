#pragma once

#include "tardi/frontend/protocol.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tardi::frontend {

inline constexpr std::size_t io_page_size = 20;

/// Applies protocol requests to one session, one at a time.
class ProtocolServer {
public:
  explicit ProtocolServer(debugger::Session& session);
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  /// Handles one NDJSON line. Returns the encoded events it produced followed
  /// by exactly one encoded response.
  std::vector<std::string> handle_line(std::string_view line);

  /// Same, without the wire encoding.
  Response handle(const Request& request, std::vector<Event>& events);

  bool quit_requested() const { return quit_; }
  debugger::Session& session() { return session_; }

private:
  json dispatch(const Request& request);

  debugger::Session& session_;
  std::vector<Event> pending_;
  bool quit_ = false;
};

/// NDJSON over a pair of streams until quit or end of input.
void serve_stream(ProtocolServer& server, std::istream& in, std::ostream& out);

/// NDJSON over TCP on 127.0.0.1:`port` (0 picks a free port). One client at
/// a time; others get a "session busy" response and are disconnected.
/// `on_listening` receives the bound port. Returns when a client sends quit.
void serve_tcp(ProtocolServer& server, std::uint16_t port, const std::function<void(std::uint16_t)>& on_listening);

} // namespace tardi::frontend
