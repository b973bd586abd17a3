#include "support.hpp"

#include "tardi/debugger/session.hpp"

#include <doctest.h>

using namespace tardi;
using namespace tardi::debugger;

namespace {

struct Rig {
  io::ScriptedBackend* backend = nullptr;
  std::unique_ptr<Session> session;
  std::vector<DebugEvent> events;

  Rig(std::shared_ptr<const lang::CheckedProgram> program, io::ScriptConfig config,
      tabling::Mode mode = tabling::Mode::full, std::string source_name = "prog.tardi") {
    auto b = std::make_unique<io::ScriptedBackend>(std::move(config));
    backend = b.get();
    session = std::make_unique<Session>(std::move(program), std::move(b), Session::Settings{mode, source_name});
    session->set_event_sink([this](const DebugEvent& ev) { events.push_back(ev); });
  }

  static Rig named(const std::string& name, tabling::Mode mode = tabling::Mode::full) {
    return Rig(testing::load_program(name), testing::load_script(name), mode, name + ".tardi");
  }

  static Rig source(std::string_view src, tabling::Mode mode = tabling::Mode::full) {
    return Rig(lang::compile(src, io::registry()), {}, mode);
  }

  Session& s() { return *session; }
  std::size_t depth() const { return session->machine().frames().size() - 1; }
  std::string trace() const { return session->trace_text(); }

  template <typename T>
  std::size_t count() const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [](const DebugEvent& e) { return std::holds_alternative<T>(e); }));
  }
};

std::string straight_trace(const std::string& name) {
  Rig rig = Rig::named(name);
  rig.s().cmd_continue();
  REQUIRE(rig.s().exited());
  return rig.trace();
}

// Everything a retry is allowed to touch, for before/after comparisons.
struct Snapshot {
  ActionNumber counter;
  std::vector<std::string> stack;
  std::size_t trace_size;
  bool operator==(const Snapshot&) const = default;
};

Snapshot snapshot(Session& s) {
  Snapshot out{s.tabling().counter(), {}, s.world().trace().size()};
  for (const auto& f : s.cmd_stack()) {
    out.stack.push_back(f.proc + "@" + std::to_string(f.location.line) + ":" + std::to_string(f.location.col) + "#" +
                        std::to_string(f.io_counter_on_entry));
  }
  return out;
}

const char* three_io = R"(
proc chatter() {
    let a = write_string(stdout, "1");
    let b = write_string(stdout, "2");
    let c = write_string(stdout, "3");
    return c;
}
proc quiet(x) {
    let y = x + 1;
    return y;
}
proc main() {
    let r = chatter();
    let q = quiet(4);
    let done = write_string(stdout, "!");
}
)";

} // namespace

TEST_CASE("session starts stopped at entry") {
  Rig rig = Rig::named("read_next_item");
  auto ev = rig.s().status_event();
  REQUIRE(std::holds_alternative<StoppedEvent>(ev));
  CHECK(std::get<StoppedEvent>(ev).reason == StopReason::entry);
  CHECK(std::get<StoppedEvent>(ev).location.proc == "main");
  CHECK(rig.s().tabling().counter() == 0);
}

TEST_CASE("break at a procedure stops at its first statement") {
  Rig rig = Rig::named("read_next_item");
  rig.s().cmd_break("read_next_item");
  auto ev = rig.s().cmd_continue();
  REQUIRE(std::holds_alternative<StoppedEvent>(ev));
  const auto& st = std::get<StoppedEvent>(ev);
  CHECK(st.reason == StopReason::breakpoint);
  CHECK(st.location.proc == "read_next_item");
  CHECK(st.location.span.line == 3);
  CHECK(st.depth == 1);
  CHECK(rig.s().tabling().counter() == 1); // the open happened
}

TEST_CASE("bad breakpoint specs") {
  Rig rig = Rig::named("read_next_item");
  CHECK_THROWS_AS(rig.s().cmd_break("nosuch"), NoSuchLocation);
  CHECK_THROWS_AS(rig.s().cmd_break("999"), NoSuchLocation);
  CHECK_THROWS_AS(rig.s().cmd_break("other.tardi:3"), NoSuchLocation);
  CHECK_THROWS_AS(rig.s().cmd_break(""), NoSuchLocation);
  CHECK_NOTHROW(rig.s().cmd_break("read_next_item.tardi:25"));
  CHECK_NOTHROW(rig.s().cmd_break("26"));
}

TEST_CASE("next over a call performing three actions") {
  Rig rig = Rig::source(three_io);
  rig.s().cmd_step(); // announce `let r = chatter();`
  REQUIRE(rig.depth() == 0);
  const ActionNumber before = rig.s().tabling().counter();
  rig.events.clear();
  auto ev = rig.s().cmd_next();
  CHECK(rig.s().tabling().counter() == before + 3);
  CHECK(rig.count<StoppedEvent>() == 1);
  REQUIRE(std::holds_alternative<StoppedEvent>(ev));
  CHECK(std::get<StoppedEvent>(ev).location.span.line == 14);
  CHECK(std::get<StoppedEvent>(ev).depth == 0);
}

TEST_CASE("step goes into calls and finish leaves them") {
  Rig rig = Rig::source(three_io);
  rig.s().cmd_step();
  auto ev = rig.s().cmd_step();
  REQUIRE(std::holds_alternative<StoppedEvent>(ev));
  CHECK(std::get<StoppedEvent>(ev).location.proc == "chatter");
  CHECK(std::get<StoppedEvent>(ev).depth == 1);
  ev = rig.s().cmd_finish();
  REQUIRE(std::holds_alternative<StoppedEvent>(ev));
  CHECK(std::get<StoppedEvent>(ev).depth == 0);
  CHECK(std::get<StoppedEvent>(ev).location.span.line == 14);
  CHECK(rig.s().tabling().counter() == 3);
}

TEST_CASE("finish in main exits") {
  Rig rig = Rig::source(three_io);
  auto ev = rig.s().cmd_finish();
  REQUIRE(std::holds_alternative<ExitedEvent>(ev));
  CHECK(std::get<ExitedEvent>(ev).code == 0);
  CHECK(rig.s().exit_code() == 0);
  CHECK_THROWS_AS(rig.s().cmd_continue(), CommandRejected);
  CHECK_THROWS_AS(rig.s().cmd_retry(0, true), CommandRejected);
}

TEST_CASE("full tabling: retry from counter 7 to entry 3 replays 3..6") {
  Rig rig = Rig::source(R"(
proc burst() {
    let a = write_string(stdout, "a");
    let b = write_string(stdout, "b");
    let c = write_string(stdout, "c");
    let d = write_string(stdout, "d");
    let e = write_string(stdout, "e");
    return e;
}
proc main() {
    let x = write_string(stdout, "x");
    let y = write_string(stdout, "y");
    let z = write_string(stdout, "z");
    let r = burst();
}
)");
  rig.s().cmd_break("7"); // `let e = ...` in burst
  rig.s().cmd_continue();
  REQUIRE(rig.s().tabling().counter() == 7);
  REQUIRE(rig.depth() == 1);
  auto report = rig.s().safety_check(1);
  CHECK(report.safe());
  CHECK(report.entry_counter == 3);
  CHECK(report.n_actions_crossed == 4);

  rig.events.clear();
  auto ev = rig.s().cmd_retry(1, false);
  REQUIRE(std::holds_alternative<RetriedEvent>(ev));
  CHECK(rig.s().tabling().counter() == 3);
  CHECK(rig.count<WarningEvent>() == 0);

  rig.s().cmd_clear_breakpoints();
  rig.events.clear();
  rig.s().cmd_continue();
  std::vector<ActionNumber> replayed, performed;
  for (const auto& e : rig.events) {
    if (auto* io = std::get_if<IoActionEvent>(&e)) (io->record.replayed ? replayed : performed).push_back(io->record.number);
  }
  CHECK(replayed == std::vector<ActionNumber>{3, 4, 5, 6});
  CHECK(performed == std::vector<ActionNumber>{7});
  CHECK(rig.backend->stdout_text() == "xyzabcde");
}

TEST_CASE("manual region [10,25), counter 30, target entry 20") {
  Rig rig = Rig::named("region", tabling::Mode::manual);
  rig.s().cmd_break("26");
  rig.s().cmd_continue();
  REQUIRE(rig.s().tabling().counter() == 10);
  rig.s().cmd_table_start();
  rig.s().cmd_clear_breakpoints();
  rig.s().cmd_break("13");
  rig.s().cmd_continue();
  REQUIRE(rig.s().tabling().counter() == 25);
  rig.s().cmd_table_stop();
  rig.s().cmd_clear_breakpoints();
  rig.s().cmd_break("14");
  rig.s().cmd_continue();
  REQUIRE(rig.s().tabling().counter() == 30);
  REQUIRE(rig.depth() == 2);
  REQUIRE(rig.s().cmd_stack()[2].io_counter_on_entry == 20);

  auto report = rig.s().safety_check(2);
  CHECK_FALSE(report.safe());
  CHECK(report.n_untabled == 5);
  CHECK(report.reason == "5 untabled I/O actions would re-execute");

  const Snapshot before = snapshot(rig.s());
  rig.events.clear();
  auto ev = rig.s().cmd_retry(2, false);
  REQUIRE(std::holds_alternative<WarningEvent>(ev));
  CHECK(std::get<WarningEvent>(ev).requires_confirmation);
  CHECK(rig.events.size() == 1);
  CHECK(snapshot(rig.s()) == before);
  CHECK(rig.s().pending_retry() == std::size_t{2});
  CHECK_THROWS_AS(rig.s().cmd_continue(), CommandRejected);

  ev = rig.s().confirm();
  REQUIRE(std::holds_alternative<RetriedEvent>(ev));
  CHECK(rig.s().tabling().counter() == 20);
  rig.s().cmd_clear_breakpoints();
  rig.events.clear();
  rig.s().cmd_continue();
  std::vector<ActionNumber> replayed, performed;
  for (const auto& e : rig.events) {
    if (auto* io = std::get_if<IoActionEvent>(&e)) (io->record.replayed ? replayed : performed).push_back(io->record.number);
  }
  CHECK(replayed == std::vector<ActionNumber>{20, 21, 22, 23, 24});
  CHECK(performed == std::vector<ActionNumber>{25, 26, 27, 28, 29});
  CHECK(rig.s().world().trace().size() == 35);
  CHECK(rig.s().exited());
}

TEST_CASE("abort leaves everything as it was") {
  Rig rig = Rig::named("write_solution", tabling::Mode::off);
  rig.s().cmd_break("16");
  rig.s().cmd_continue();
  const Snapshot before = snapshot(rig.s());
  auto ev = rig.s().cmd_retry(0, false);
  REQUIRE(std::holds_alternative<WarningEvent>(ev));
  rig.s().abort();
  CHECK(snapshot(rig.s()) == before);
  CHECK_FALSE(rig.s().pending_retry());
  CHECK_THROWS_AS(rig.s().confirm(), CommandRejected);
  rig.s().cmd_continue();
  CHECK(rig.backend->stdout_text() == "solution: 50\ndone\n");
}

TEST_CASE("retry of a frame with no I/O yet is trivially safe") {
  for (auto mode : {tabling::Mode::off, tabling::Mode::manual, tabling::Mode::full}) {
    Rig rig = Rig::source(three_io, mode);
    rig.s().cmd_break("quiet");
    rig.s().cmd_continue();
    auto r = rig.s().safety_check(1);
    CHECK(r.n_actions_crossed == 0);
    CHECK(r.safe());
    CHECK(std::holds_alternative<RetriedEvent>(rig.s().cmd_retry(1, false)));
  }
}

TEST_CASE("safety_check verdicts by mode") {
  Rig off = Rig::source(three_io, tabling::Mode::off);
  off.s().cmd_break("5"); // after two writes
  off.s().cmd_continue();
  auto r = off.s().safety_check(1);
  CHECK(r.n_actions_crossed == 2);
  CHECK_FALSE(r.safe());
  CHECK(r.reason == "2 untabled I/O actions would re-execute");
  CHECK_THROWS_AS(off.s().safety_check(5), vm::BadDepth);
  CHECK_THROWS_AS(off.s().cmd_retry(5, false), vm::BadDepth);

  Rig full = Rig::source(three_io);
  full.s().cmd_break("5");
  full.s().cmd_continue();
  CHECK(full.s().safety_check(1).safe());
  CHECK(full.s().safety_check(0).safe());
}

TEST_CASE("list_io_actions") {
  Rig rig = Rig::source(three_io);
  rig.s().cmd_break("14");
  rig.s().cmd_continue();
  // completed chatter call: entry 0, exit 3
  REQUIRE(rig.s().recent_calls().size() == 1);
  const CallRecord& c = rig.s().recent_calls().front();
  CHECK(c.proc == "chatter");
  auto summary = rig.s().list_call_io_actions(c.id);
  CHECK(summary.entry_counter == 0);
  CHECK(summary.exit_counter == 3);
  REQUIRE(summary.actions.size() == 3);
  for (ActionNumber i = 0; i < 3; ++i) CHECK(summary.actions[i].number == i);

  rig.s().cmd_step(); // into quiet
  CHECK(rig.s().list_io_actions(1).actions.empty());
  CHECK(rig.s().list_io_actions(0).actions.size() == 3);
  CHECK_THROWS_AS(rig.s().list_io_actions(4), vm::BadDepth);
  CHECK_THROWS_AS(rig.s().list_call_io_actions(99), NoSuchLocation);

  Rig off = Rig::source(three_io, tabling::Mode::off);
  off.s().cmd_break("14");
  off.s().cmd_continue();
  CHECK_THROWS_AS(off.s().list_io_actions(0), NotTabled);
}

TEST_CASE("completed-call history is bounded") {
  Rig rig = Rig::source(R"(
proc count(i, n) {
    if i == n {
        return 0;
    }
    let rest = count(i + 1, n);
    return rest + 1;
}
proc main() {
    let c = count(0, 5000);
}
)");
  rig.s().cmd_continue();
  CHECK(rig.s().recent_calls().size() == Session::call_history_limit);
  CHECK(rig.s().recent_calls().back().id == 5000);
}

TEST_CASE("print, stack and io-table") {
  Rig rig = Rig::named("region");
  rig.s().cmd_break("14");
  rig.s().cmd_continue();
  CHECK(rig.s().cmd_print("a") == Value(5));
  CHECK_THROWS_AS(rig.s().cmd_print("done"), UnboundVariable);
  CHECK_THROWS_AS(rig.s().cmd_print("nosuch"), UnboundVariable);
  auto stack = rig.s().cmd_stack();
  REQUIRE(stack.size() == 3);
  for (std::size_t i = 1; i < stack.size(); ++i) CHECK(stack[i].io_counter_on_entry >= stack[i - 1].io_counter_on_entry);

  Rig three = Rig::source(three_io);
  three.s().cmd_break("14");
  three.s().cmd_continue();
  const std::string table = three.s().cmd_io_table();
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}

TEST_CASE("arguments survive a retry") {
  Rig rig = Rig::source(R"(
proc f(x, s) {
    let y = x * 3;
    let w = write_string(stdout, s);
    return y;
}
proc main() {
    let r = f(14, "arg");
}
)");
  rig.s().cmd_break("5");
  rig.s().cmd_continue();
  const Value x = rig.s().cmd_print("x"), s = rig.s().cmd_print("s");
  rig.s().cmd_retry(1, false);
  CHECK(rig.s().cmd_print("x") == x);
  CHECK(rig.s().cmd_print("s") == s);
  CHECK_THROWS_AS(rig.s().cmd_print("y"), UnboundVariable);
}

TEST_CASE("retrying twice equals retrying once") {
  Rig once = Rig::named("fifty");
  Rig twice = Rig::named("fifty");
  for (Rig* r : {&once, &twice}) {
    r->s().cmd_break("leaf");
    for (int i = 0; i < 7; ++i) r->s().cmd_continue();
    r->s().cmd_next();
  }
  once.s().cmd_retry(2, false);
  twice.s().cmd_retry(2, false);
  twice.s().cmd_retry(2, false);
  CHECK(snapshot(once.s()) == snapshot(twice.s()));
  CHECK(once.s().cmd_print("i", 2) == twice.s().cmd_print("i", 2));
}

TEST_CASE("divergence halts the session") {
  Rig rig = Rig::named("diverge", tabling::Mode::manual);
  rig.s().cmd_break("act");
  rig.s().cmd_continue();
  REQUIRE(rig.s().tabling().counter() == 1);
  rig.s().cmd_table_start();
  rig.s().cmd_clear_breakpoints();
  rig.s().cmd_break("16");
  rig.s().cmd_continue();
  REQUIRE(rig.s().tabling().counter() == 2);
  auto ev = rig.s().cmd_retry(0, false);
  REQUIRE(std::holds_alternative<WarningEvent>(ev));
  rig.s().confirm();
  rig.s().cmd_clear_breakpoints();
  rig.events.clear();
  ev = rig.s().cmd_continue();
  REQUIRE(std::holds_alternative<DivergenceEvent>(ev));
  const auto& d = std::get<DivergenceEvent>(ev);
  CHECK(d.number == 1);
  CHECK(d.recorded_name == "write_string");
  CHECK(d.attempted_name == "open_file");
  CHECK(rig.count<DivergenceEvent>() == 1);
  CHECK(rig.s().halted());
  CHECK(rig.s().exit_code() == 3);
  CHECK_THROWS_AS(rig.s().cmd_continue(), CommandRejected);
  CHECK_THROWS_AS(rig.s().cmd_step(), CommandRejected);
  CHECK_THROWS_AS(rig.s().cmd_retry(0, true), CommandRejected);
  CHECK_THROWS_AS(rig.s().cmd_table_stop(), CommandRejected);
  CHECK_NOTHROW(rig.s().cmd_stack());
  CHECK_NOTHROW(rig.s().cmd_io_table());
  CHECK(rig.count<DivergenceEvent>() == 1);
  CHECK(std::holds_alternative<DivergenceEvent>(rig.s().status_event()));
}

TEST_CASE("a program fault stops the session with exit code 2") {
  Rig rig = Rig::source("proc main() { let z = 0; let q = 1 / z; }");
  auto ev = rig.s().cmd_continue();
  REQUIRE(std::holds_alternative<StoppedEvent>(ev));
  CHECK(std::get<StoppedEvent>(ev).reason == StopReason::fault);
  CHECK(std::get<StoppedEvent>(ev).detail == "division by zero");
  CHECK(rig.s().exit_code() == 2);
}

TEST_CASE("manual mode commands are rejected in other modes") {
  Rig rig = Rig::named("write_solution");
  CHECK_THROWS_AS(rig.s().cmd_table_start(), tabling::ModeViolation);
  CHECK_THROWS_AS(rig.s().cmd_table_stop(), tabling::ModeViolation);
}

// ---- properties over random stop points ----

TEST_CASE("property: a single retry under full tabling is transparent and sound") {
  std::mt19937_64 rng(2026);
  for (const char* name : {"write_solution", "read_problem", "get_stream", "read_next_item", "fifty", "region"}) {
    const std::string expected = straight_trace(name);
    for (int trial = 0; trial < 25; ++trial) {
      CAPTURE(name);
      CAPTURE(trial);
      Rig rig = Rig::named(name);
      const int steps = static_cast<int>(rng() % 200);
      for (int i = 0; i < steps && !rig.s().exited(); ++i) rig.s().cmd_step();
      if (rig.s().exited()) continue;
      const std::size_t target = rng() % (rig.depth() + 1);
      const ActionNumber pre = rig.s().tabling().counter();
      const std::size_t trace_before = rig.s().world().trace().size();
      REQUIRE(rig.s().safety_check(target).safe());
      rig.s().cmd_retry(target, false);
      rig.s().cmd_continue();
      REQUIRE(rig.s().exited());
      CHECK(rig.trace() == expected);
      // no backend call below the pre-retry counter after the retry
      const auto& records = rig.s().world().trace().records();
      for (std::size_t i = trace_before; i < records.size(); ++i) CHECK(records[i].action_number >= pre);
    }
  }
}

TEST_CASE("property: untabled spans always warn before changing state") {
  std::mt19937_64 rng(77);
  int warnings = 0, safe_retries = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Rig rig = Rig::named("fifty", tabling::Mode::manual);
    for (int step = 0; step < 40 && !rig.s().exited(); ++step) {
      const int what = static_cast<int>(rng() % 10);
      if (what == 0) {
        if (!rig.s().tabling().enabled() && !rig.s().tabling().region()) rig.s().cmd_table_start();
      } else if (what == 1) {
        if (rig.s().tabling().enabled()) rig.s().cmd_table_stop();
      } else if (what == 2) {
        const std::size_t target = rng() % (rig.depth() + 1);
        const ActionNumber entry = rig.s().cmd_stack()[target].io_counter_on_entry;
        const ActionNumber now = rig.s().tabling().counter();
        bool any_untabled = false;
        for (ActionNumber n = entry; n < now; ++n) any_untabled |= !rig.s().tabling().tabled(n);
        const Snapshot before = snapshot(rig.s());
        rig.events.clear();
        auto ev = rig.s().cmd_retry(target, false);
        if (any_untabled) {
          REQUIRE(std::holds_alternative<WarningEvent>(ev));
          REQUIRE(rig.events.size() == 1);
          REQUIRE(snapshot(rig.s()) == before);
          rig.s().abort();
          REQUIRE(snapshot(rig.s()) == before);
          ++warnings;
        } else {
          REQUIRE(std::holds_alternative<RetriedEvent>(ev));
          REQUIRE(rig.s().tabling().counter() == entry);
          ++safe_retries;
        }
      } else {
        rig.s().cmd_step();
      }
    }
  }
  CHECK(warnings > 50);
  CHECK(safe_retries > 50);
}
