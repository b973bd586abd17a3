#include "tardi/frontend/repl.hpp"

#include "tardi/frontend/server.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace tardi::frontend {

namespace {

std::string where(const debugger::Location& loc) {
  return loc.proc + " at " + std::to_string(loc.span.line) + ":" + std::to_string(loc.span.col);
}

std::string format_record(const tabling::IoActionRecord& r) {
  std::string out = std::to_string(r.number) + "  " + r.name + render_list(r.inputs) + " -> " + render_list(r.outputs);
  if (r.replayed) out += "  (replayed)";
  return out;
}

std::optional<std::size_t> parse_number(std::string_view text) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return v;
}

const char* help_text =
    "commands:\n"
    "  break LOC            stop at a procedure, LINE or FILE:LINE\n"
    "  clear                remove all breakpoints\n"
    "  continue | c         run to the next breakpoint or exit\n"
    "  step | s             one statement, into calls\n"
    "  next | n             one statement, over calls\n"
    "  finish               run until the current call returns\n"
    "  retry DEPTH [--force] restart the active call at DEPTH\n"
    "  safety DEPTH         show whether retrying DEPTH is safe\n"
    "  stack | bt           frames with their entry counters\n"
    "  print NAME [DEPTH]   show a variable\n"
    "  io-actions DEPTH [PAGE] | io-actions call ID [PAGE]\n"
    "  calls                recently completed calls\n"
    "  io-table             the answer table\n"
    "  table start|stop     manual tabling control\n"
    "  trace-dump FILE      write the effects trace\n"
    "  quit | q\n";

} // namespace

std::string format_event(const debugger::DebugEvent& ev) {
  using namespace debugger;
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, StoppedEvent>) {
          if (e.reason == StopReason::fault) return "fault in " + where(e.location) + ": " + e.detail;
          return "stopped (" + std::string(stop_reason_name(e.reason)) + ") in " + where(e.location) + ", depth " +
                 std::to_string(e.depth);
        } else if constexpr (std::is_same_v<T, IoActionEvent>) {
          return "io " + format_record(e.record);
        } else if constexpr (std::is_same_v<T, WarningEvent>) {
          return "warning: " + e.text;
        } else if constexpr (std::is_same_v<T, DivergenceEvent>) {
          return e.description + "\nsession halted; only inspection and quit are allowed";
        } else if constexpr (std::is_same_v<T, ExitedEvent>) {
          return "program exited with code " + std::to_string(e.code);
        } else {
          return "retried frame " + std::to_string(e.depth) + " (" + where(e.location) + "), I/O counter reset to " +
                 std::to_string(e.counter);
        }
      },
      ev);
}

int repl(debugger::Session& session, std::istream& in, std::ostream& out) {
  session.set_event_sink([&](const debugger::DebugEvent& ev) { out << format_event(ev) << '\n'; });
  out << format_event(session.status_event()) << '\n';

  auto print_summary = [&](const debugger::CallIoSummary& s, std::size_t page) {
    const std::size_t total = s.actions.size();
    const std::size_t pages = std::max<std::size_t>(1, (total + io_page_size - 1) / io_page_size);
    if (page >= pages) throw Error("page out of range (" + std::to_string(pages) + " pages)");
    out << "I/O actions " << s.entry_counter << ".." << s.exit_counter << " (" << total << " total, page "
        << page + 1 << "/" << pages << ")\n";
    if (total == 0) out << "  no I/O in this call\n";
    for (std::size_t i = page * io_page_size; i < std::min(total, (page + 1) * io_page_size); ++i) {
      out << "  " << format_record(s.actions[i]) << '\n';
    }
  };

  std::string line;
  while (true) {
    out << "(tardi) " << std::flush;
    if (!std::getline(in, line)) break;
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string t; words >> t;) w.push_back(t);
    if (w.empty()) continue;
    const std::string& cmd = w[0];
    auto number = [&](std::size_t i) -> std::size_t {
      if (i >= w.size()) throw Error(cmd + ": missing number");
      auto n = parse_number(w[i]);
      if (!n) throw Error(cmd + ": not a number: " + w[i]);
      return *n;
    };

    try {
      if (cmd == "quit" || cmd == "q") {
        break;
      } else if (cmd == "help" || cmd == "h") {
        out << help_text;
      } else if (cmd == "break" || cmd == "b") {
        if (w.size() < 2) throw Error("break: missing location");
        session.cmd_break(w[1]);
        out << "breakpoint at " << w[1] << '\n';
      } else if (cmd == "clear") {
        session.cmd_clear_breakpoints();
        out << "breakpoints cleared\n";
      } else if (cmd == "continue" || cmd == "c") {
        session.cmd_continue();
      } else if (cmd == "step" || cmd == "s") {
        session.cmd_step();
      } else if (cmd == "next" || cmd == "n") {
        session.cmd_next();
      } else if (cmd == "finish") {
        session.cmd_finish();
      } else if (cmd == "retry") {
        const std::size_t depth = number(1);
        const bool force = w.size() > 2 && w[2] == "--force";
        auto ev = session.cmd_retry(depth, force);
        if (std::holds_alternative<debugger::WarningEvent>(ev)) {
          out << "proceed? [y/N] " << std::flush;
          std::string answer;
          std::getline(in, answer);
          if (answer == "y" || answer == "Y" || answer == "yes") {
            session.confirm();
          } else {
            session.abort();
            out << "retry aborted\n";
          }
        }
      } else if (cmd == "safety") {
        auto r = session.safety_check(number(1));
        out << (r.safe() ? "safe" : "unsafe") << ": " << r.n_actions_crossed << " I/O actions crossed ("
            << r.entry_counter << ".." << r.current_counter << ")";
        if (!r.safe()) out << ", " << r.reason;
        out << '\n';
      } else if (cmd == "stack" || cmd == "bt") {
        for (const vm::FrameSummary& f : session.cmd_stack()) {
          out << "#" << f.depth << "  " << f.proc << " at " << f.location.line << ":" << f.location.col
              << "  entry counter " << f.io_counter_on_entry << '\n';
        }
        out << "I/O counter " << session.tabling().counter() << '\n';
      } else if (cmd == "print" || cmd == "p") {
        if (w.size() < 2) throw Error("print: missing name");
        Value v = w.size() > 2 ? session.cmd_print(w[1], number(2)) : session.cmd_print(w[1]);
        out << w[1] << " = " << render(v) << '\n';
      } else if (cmd == "io-actions") {
        if (w.size() > 1 && w[1] == "call") {
          print_summary(session.list_call_io_actions(number(2)), w.size() > 3 ? number(3) - 1 : 0);
        } else {
          const std::size_t page = w.size() > 2 ? number(2) : 1;
          if (page == 0) throw Error("pages are numbered from 1");
          print_summary(session.list_io_actions(number(1)), page - 1);
        }
      } else if (cmd == "calls") {
        for (const debugger::CallRecord& c : session.recent_calls()) {
          out << "call " << c.id << "  " << c.proc << "  depth " << c.depth << "  I/O " << c.entry_counter << ".."
              << c.exit_counter << '\n';
        }
      } else if (cmd == "io-table") {
        out << session.cmd_io_table();
      } else if (cmd == "table") {
        if (w.size() < 2) throw Error("table: expected start or stop");
        if (w[1] == "start") {
          session.cmd_table_start();
        } else if (w[1] == "stop") {
          session.cmd_table_stop();
        } else {
          throw Error("table: expected start or stop");
        }
        out << "tabling " << (session.tabling().enabled() ? "on" : "off") << " at counter "
            << session.tabling().counter() << '\n';
      } else if (cmd == "trace-dump") {
        if (w.size() < 2) throw Error("trace-dump: missing file");
        session.cmd_trace_dump(w[1]);
        out << "wrote " << session.world().trace().size() << " records to " << w[1] << '\n';
      } else {
        out << "unknown command " << cmd << " (try help)\n";
      }
    } catch (const Error& e) {
      out << "error: " << e.what() << '\n';
    }
  }
  return session.exit_code();
}

} // namespace tardi::frontend
