#include "tardi/frontend/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

namespace tardi::frontend {

namespace {

class BadRequest : public Error {
public:
  using Error::Error;
};

class UnknownCommand : public Error {
public:
  using Error::Error;
};

std::int64_t int_arg(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || !it->is_number_integer()) {
    throw BadRequest(std::string("argument ") + key + " must be an integer");
  }
  return it->get<std::int64_t>();
}

std::int64_t int_arg_or(const json& args, const char* key, std::int64_t fallback) {
  return args.contains(key) ? int_arg(args, key) : fallback;
}

std::string string_arg(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || !it->is_string()) throw BadRequest(std::string("argument ") + key + " must be a string");
  return it->get<std::string>();
}

bool bool_arg_or(const json& args, const char* key, bool fallback) {
  auto it = args.find(key);
  if (it == args.end()) return fallback;
  if (!it->is_boolean()) throw BadRequest(std::string("argument ") + key + " must be a boolean");
  return it->get<bool>();
}

std::size_t depth_arg(const json& args) {
  std::int64_t d = int_arg(args, "depth");
  if (d < 0) throw vm::BadDepth("negative depth " + std::to_string(d));
  return static_cast<std::size_t>(d);
}

json stop_body(const debugger::DebugEvent& ev) {
  Event e = event_to_message(ev);
  return {{"event", {{"type", e.type}, {"payload", e.payload}}}};
}

json summary_page(const debugger::CallIoSummary& summary, std::int64_t page) {
  const std::size_t total = summary.actions.size();
  const std::size_t pages = (total + io_page_size - 1) / io_page_size;
  if (page < 0 || (pages > 0 && static_cast<std::size_t>(page) >= pages) || (pages == 0 && page != 0)) {
    throw BadRequest("page " + std::to_string(page) + " out of range (" + std::to_string(pages) + " pages)");
  }
  json actions = json::array();
  const std::size_t first = static_cast<std::size_t>(page) * io_page_size;
  for (std::size_t i = first; i < std::min(total, first + io_page_size); ++i) {
    actions.push_back(record_to_json(summary.actions[i]));
  }
  return {{"entry_counter", summary.entry_counter},
          {"exit_counter", summary.exit_counter},
          {"total", total},
          {"page", page},
          {"pages", pages},
          {"page_size", io_page_size},
          {"actions", actions}};
}

json tabling_body(const tabling::TablingState& t) {
  json region = nullptr;
  if (t.region()) {
    region = {{"start", t.region()->start}, {"end", t.region()->end ? json(*t.region()->end) : json(nullptr)}};
  }
  return {{"mode", tabling::mode_name(t.mode())}, {"enabled", t.enabled()}, {"counter", t.counter()},
          {"region", region}};
}

} // namespace

ProtocolServer::ProtocolServer(debugger::Session& session) : session_(session) {
  session_.set_event_sink([this](const debugger::DebugEvent& ev) { pending_.push_back(event_to_message(ev)); });
}

json ProtocolServer::dispatch(const Request& req) {
  const std::string& cmd = req.cmd;
  const json& args = req.args;
  debugger::Session& s = session_;

  if (cmd == "break") {
    s.cmd_break(string_arg(args, "location"));
    return json::object();
  }
  if (cmd == "clear") {
    s.cmd_clear_breakpoints();
    return json::object();
  }
  if (cmd == "continue") return stop_body(s.cmd_continue());
  if (cmd == "step") return stop_body(s.cmd_step());
  if (cmd == "next") return stop_body(s.cmd_next());
  if (cmd == "finish") return stop_body(s.cmd_finish());

  if (cmd == "retry" || cmd == "confirm") {
    std::size_t depth = 0;
    if (cmd == "retry") {
      depth = depth_arg(args);
    } else if (!s.pending_retry()) {
      throw debugger::CommandRejected("no retry is waiting for confirmation");
    } else {
      depth = *s.pending_retry();
    }
    debugger::RetrySafetyReport report = s.safety_check(depth);
    debugger::DebugEvent ev = cmd == "retry" ? s.cmd_retry(depth, bool_arg_or(args, "force", false)) : s.confirm();
    json body = report_to_json(report);
    body["needs_confirm"] = std::holds_alternative<debugger::WarningEvent>(ev);
    body["retried"] = std::holds_alternative<debugger::RetriedEvent>(ev);
    return body;
  }
  if (cmd == "abort") {
    s.abort();
    return {{"aborted", true}};
  }
  if (cmd == "safety") return report_to_json(s.safety_check(depth_arg(args)));

  if (cmd == "stack") {
    json frames = json::array();
    for (const vm::FrameSummary& f : s.cmd_stack()) {
      frames.push_back({{"depth", f.depth},
                        {"proc", f.proc},
                        {"call_site", span_to_json(f.call_site)},
                        {"io_counter_on_entry", f.io_counter_on_entry},
                        {"location", span_to_json(f.location)}});
    }
    return {{"frames", frames}, {"counter", s.tabling().counter()}};
  }
  if (cmd == "print") {
    std::string name = string_arg(args, "name");
    Value v = args.contains("depth") ? s.cmd_print(name, depth_arg(args)) : s.cmd_print(name);
    return {{"value", value_to_json(v)}, {"text", render(v)}};
  }
  if (cmd == "io-actions") {
    const std::int64_t page = int_arg_or(args, "page", 0);
    if (args.contains("call")) {
      std::int64_t id = int_arg(args, "call");
      if (id < 0) throw BadRequest("negative call id");
      return summary_page(s.list_call_io_actions(static_cast<std::uint64_t>(id)), page);
    }
    return summary_page(s.list_io_actions(depth_arg(args)), page);
  }
  if (cmd == "calls") {
    json calls = json::array();
    for (const debugger::CallRecord& c : s.recent_calls()) {
      calls.push_back({{"id", c.id},
                       {"proc", c.proc},
                       {"depth", c.depth},
                       {"entry_counter", c.entry_counter},
                       {"exit_counter", c.exit_counter}});
    }
    return {{"calls", calls}};
  }
  if (cmd == "io-table") {
    json entries = json::array();
    s.tabling().table().for_each([&](ActionNumber n, const tabling::AnswerBlock& b) {
      json outputs = json::array();
      for (std::size_t i = 0; i < b.n_outputs(); ++i) {
        outputs.push_back(b.output_set(i) ? value_to_json(b.restore_answer(i)) : json(nullptr));
      }
      json inputs = json::array();
      for (const Value& v : b.inputs()) inputs.push_back(value_to_json(v));
      entries.push_back(
          {{"n", n}, {"name", b.name()}, {"inputs", inputs}, {"outputs", outputs}, {"replay_count", b.replay_count()}});
    });
    json body = tabling_body(s.tabling());
    body["entries"] = entries;
    body["capacity"] = s.tabling().table().capacity();
    body["text"] = s.cmd_io_table();
    return body;
  }
  if (cmd == "table") {
    std::string action = string_arg(args, "action");
    if (action == "start") {
      s.cmd_table_start();
    } else if (action == "stop") {
      s.cmd_table_stop();
    } else if (action != "status") {
      throw BadRequest("table action must be start, stop or status");
    }
    return tabling_body(s.tabling());
  }
  if (cmd == "trace-dump") {
    if (args.contains("file")) {
      s.cmd_trace_dump(string_arg(args, "file"));
      return {{"records", s.world().trace().size()}};
    }
    return {{"records", s.world().trace().size()}, {"text", s.trace_text()}};
  }
  if (cmd == "status") return stop_body(s.status_event());
  if (cmd == "quit") {
    quit_ = true;
    return {{"exit_code", s.exit_code()}};
  }
  throw UnknownCommand("unknown command " + cmd);
}

Response ProtocolServer::handle(const Request& request, std::vector<Event>& events) {
  Response r;
  r.id = request.id;
  auto fail = [&](const char* code, const std::exception& e) {
    r.ok = false;
    r.error = code;
    r.message = e.what();
  };
  try {
    r.body = dispatch(request);
  } catch (const BadRequest& e) {
    fail("bad-request", e);
  } catch (const UnknownCommand& e) {
    fail("unknown-command", e);
  } catch (const vm::BadDepth& e) {
    fail("bad-depth", e);
  } catch (const debugger::NoSuchLocation& e) {
    fail("no-such-location", e);
  } catch (const debugger::NotTabled& e) {
    fail("not-tabled", e);
  } catch (const debugger::UnboundVariable& e) {
    fail("unbound", e);
  } catch (const debugger::CommandRejected& e) {
    fail("rejected", e);
  } catch (const tabling::ModeViolation& e) {
    fail("mode", e);
  } catch (const Error& e) {
    fail("error", e);
  }
  events.insert(events.end(), std::make_move_iterator(pending_.begin()), std::make_move_iterator(pending_.end()));
  pending_.clear();
  return r;
}

std::vector<std::string> ProtocolServer::handle_line(std::string_view line) {
  std::vector<std::string> out;
  ProtocolMessage message;
  try {
    message = decode(line);
  } catch (const ProtocolError& e) {
    Response r;
    r.ok = false;
    r.error = "parse";
    r.message = e.what();
    // Salvage the id when the JSON itself was fine.
    json j = json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("id") && j["id"].is_number_integer()) r.id = j["id"].get<std::int64_t>();
    out.push_back(encode(r));
    return out;
  }
  auto* request = std::get_if<Request>(&message);
  if (!request) {
    Response r;
    r.ok = false;
    r.error = "parse";
    r.message = "expected a request";
    out.push_back(encode(r));
    return out;
  }
  std::vector<Event> events;
  Response r = handle(*request, events);
  for (const Event& e : events) out.push_back(encode(e));
  out.push_back(encode(r));
  return out;
}

void serve_stream(ProtocolServer& server, std::istream& in, std::ostream& out) {
  std::string line;
  while (!server.quit_requested() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    for (const std::string& reply : server.handle_line(line)) out << reply << '\n';
    out.flush();
  }
}

namespace {

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

struct Fd {
  int fd = -1;
  ~Fd() { reset(); }
  void reset(int v = -1) {
    if (fd >= 0) ::close(fd);
    fd = v;
  }
};

} // namespace

void serve_tcp(ProtocolServer& server, std::uint16_t port, const std::function<void(std::uint16_t)>& on_listening) {
  Fd listener;
  listener.fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener.fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(listener.fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listener.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    throw Error("bind port " + std::to_string(port) + ": " + std::strerror(errno));
  }
  if (::listen(listener.fd, 4) < 0) throw Error(std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof addr;
  ::getsockname(listener.fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening) on_listening(ntohs(addr.sin_port));

  Fd client;
  std::string buffer;
  while (!server.quit_requested()) {
    pollfd fds[2] = {{listener.fd, POLLIN, 0}, {client.fd, POLLIN, 0}};
    int ready = ::poll(fds, client.fd >= 0 ? 2 : 1, -1);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("poll: ") + std::strerror(errno));
    }
    if (fds[0].revents & POLLIN) {
      int fd = ::accept(listener.fd, nullptr, nullptr);
      if (fd >= 0) {
        if (client.fd >= 0) {
          Response busy;
          busy.ok = false;
          busy.error = "busy";
          busy.message = "session busy";
          send_all(fd, encode(busy) + "\n");
          ::close(fd);
        } else {
          client.reset(fd);
          buffer.clear();
        }
      }
    }
    if (client.fd >= 0 && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
      char chunk[4096];
      ssize_t n = ::recv(client.fd, chunk, sizeof chunk, 0);
      if (n <= 0) {
        // Connection lost: the session simply stays stopped for the next client.
        client.reset();
        continue;
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while (!server.quit_requested() && (nl = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::string reply;
        for (const std::string& l : server.handle_line(line)) reply += l + "\n";
        if (!send_all(client.fd, reply)) {
          client.reset();
          break;
        }
      }
    }
  }
}

} // namespace tardi::frontend
