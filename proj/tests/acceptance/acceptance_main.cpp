// Headless acceptance suite. Debugger scenarios are driven through the NDJSON
// protocol server, the same surface a front end uses. One PASS/FAIL line per
// criterion; the exit status is nonzero if any criterion fails.

#include "support.hpp"

#include "tardi/frontend/server.hpp"
#include "tardi/vm/machine.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace tardi;
using namespace tardi::frontend;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failure notes for the criterion being evaluated.
struct Verdict {
  std::vector<std::string> problems;
  void expect(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  bool passed() const { return problems.empty(); }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Verdict&)>& body) {
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.problems.push_back(std::string("exception: ") + e.what());
  }
  std::cout << (v.passed() ? "PASS " : "FAIL ") << name;
  if (!v.passed()) {
    std::cout << ":";
    for (const auto& p : v.problems) std::cout << " [" << p << "]";
    ++failures;
  }
  std::cout << std::endl;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// A debugger session plus a protocol client speaking to it line by line.
struct Client {
  io::ScriptedBackend* backend = nullptr;
  std::unique_ptr<debugger::Session> session;
  std::unique_ptr<ProtocolServer> server;
  std::int64_t next_id = 1;
  std::vector<Event> events; // everything seen so far

  Client(const std::string& name, tabling::Mode mode, io::ScriptConfig config) {
    auto b = std::make_unique<io::ScriptedBackend>(std::move(config));
    backend = b.get();
    session = std::make_unique<debugger::Session>(testing::load_program(name), std::move(b),
                                                  debugger::Session::Settings{mode, name + ".tardi"});
    server = std::make_unique<ProtocolServer>(*session);
  }
  Client(const std::string& name, tabling::Mode mode) : Client(name, mode, testing::load_script(name)) {}

  // Sends one request; returns the events it produced and its response.
  std::pair<std::vector<Event>, Response> call(const std::string& cmd, json args = json::object()) {
    const std::int64_t id = next_id++;
    std::vector<Event> produced;
    Response response;
    for (const std::string& line : server->handle_line(encode(Request{id, cmd, std::move(args)}))) {
      ProtocolMessage m = decode(line);
      if (auto* e = std::get_if<Event>(&m)) {
        produced.push_back(*e);
      } else {
        response = std::get<Response>(m);
      }
    }
    if (response.id != id) throw Error("response id mismatch for " + cmd);
    events.insert(events.end(), produced.begin(), produced.end());
    return {produced, response};
  }

  json ok(const std::string& cmd, json args = json::object()) {
    auto [evs, r] = call(cmd, std::move(args));
    if (!r.ok) throw Error(cmd + " failed: " + r.error + ": " + r.message);
    return r.body;
  }

  std::string trace() { return ok("trace-dump")["text"]; }
  std::int64_t counter() { return ok("stack")["counter"]; }
};

std::string straight_trace(const std::string& name, tabling::Mode mode = tabling::Mode::full) {
  Client c(name, mode);
  json body = c.ok("continue");
  if (body["event"]["type"] != "exited") throw Error(name + " did not exit");
  return c.trace();
}

// Where each scenario stops (after its I/O) and which call it retries.
struct Scenario {
  std::string program;
  std::string stop_at;
  int hits; // continues needed to reach the interesting stop
  std::int64_t depth;
};

const Scenario scenarios[] = {
    {"write_solution", "11", 1, 1}, // after the write inside write_solution
    {"read_problem", "13", 1, 1},   // after read_line inside read_problem
    {"get_stream", "7", 1, 1},      // after the open inside get_stream
    {"read_next_item", "7", 1, 1},  // second call, after the close on eof
};

// Runs a scenario to its stop point, retries, and continues to exit.
void retry_scenario(Client& c, const Scenario& s, bool force) {
  c.ok("break", {{"location", s.stop_at}});
  for (int i = 0; i < s.hits; ++i) c.ok("continue");
  json args = {{"depth", s.depth}};
  if (force) args["force"] = true;
  json r = c.ok("retry", args);
  if (r["retried"] != true) throw Error(s.program + ": retry did not happen");
  c.ok("clear");
  json body = c.ok("continue");
  if (body["event"]["type"] != "exited") throw Error(s.program + ": did not exit after retry");
}

std::size_t close_errors(const io::EffectsTrace& trace) {
  std::size_t n = 0;
  for (const auto& r : trace.records()) {
    if (r.name == "close_file" && !r.outputs.empty() && r.outputs[0].is_variant("error")) ++n;
  }
  return n;
}

void at_most_once(Verdict& v) {
  for (const Scenario& s : scenarios) {
    const auto t0 = Clock::now();
    const std::string a = straight_trace(s.program);
    Client c(s.program, tabling::Mode::full);
    retry_scenario(c, s, false);
    const std::string b = c.trace();
    const double took = seconds_since(t0);
    v.expect(!a.empty(), s.program + ": empty trace");
    v.expect(a == b, s.program + ": trace after retry differs");
    v.expect(took < 1.0, s.program + ": took " + std::to_string(took) + " s");
  }
}

void double_close(Verdict& v) {
  const Scenario& s = scenarios[3];
  Client full(s.program, tabling::Mode::full);
  retry_scenario(full, s, false);
  v.expect(close_errors(full.session->world().trace()) == 0, "full: close errors present");

  Client off(s.program, tabling::Mode::off);
  retry_scenario(off, s, true);
  const std::size_t n = close_errors(off.session->world().trace());
  v.expect(n == 1, "off: " + std::to_string(n) + " close errors, want 1");
}

void resource_leak(Verdict& v) {
  const Scenario& s = scenarios[2];
  Client full(s.program, tabling::Mode::full);
  retry_scenario(full, s, false);
  v.expect(full.backend->open_handle_count() == 1,
           "full: " + std::to_string(full.backend->open_handle_count()) + " open handles");

  Client off(s.program, tabling::Mode::off);
  retry_scenario(off, s, true);
  v.expect(off.backend->open_handle_count() == 2,
           "off: " + std::to_string(off.backend->open_handle_count()) + " open handles");
}

void counter_reset(Verdict& v) {
  std::mt19937_64 rng(20260);
  std::size_t retries = 0, replays_checked = 0;
  for (int schedule = 0; schedule < 60; ++schedule) {
    Client c("fifty", tabling::Mode::full);
    std::map<std::int64_t, json> seen; // action number -> first io_action payload
    auto absorb = [&](const std::vector<Event>& evs) {
      for (const Event& e : evs) {
        if (e.type == "io_action" && !seen.count(e.payload["n"])) seen[e.payload["n"]] = e.payload;
      }
    };
    std::optional<std::int64_t> replay_until; // allocations below this must replay
    for (int op = 0; op < 120; ++op) {
      const int pick = static_cast<int>(rng() % 10);
      if (pick < 7) {
        const char* cmds[] = {"step", "step", "step", "step", "next", "next", "finish"};
        auto [evs, r] = c.call(cmds[pick]);
        if (!r.ok) throw Error(std::string(cmds[pick]) + ": " + r.message);
        for (const Event& e : evs) {
          if (e.type != "io_action" || !replay_until) continue;
          const std::int64_t n = e.payload["n"];
          if (n < *replay_until) {
            ++replays_checked;
            v.expect(e.payload["replayed"] == true, "action " + std::to_string(n) + " was not replayed");
            v.expect(seen.count(n) && seen[n]["outputs"] == e.payload["outputs"],
                     "action " + std::to_string(n) + " replayed different outputs");
          }
        }
        absorb(evs);
        if (r.body["event"]["type"] == "exited") break;
      } else {
        json stack = c.ok("stack");
        const std::size_t depth = rng() % stack["frames"].size();
        const std::int64_t entry = stack["frames"][depth]["io_counter_on_entry"];
        const std::int64_t before = stack["counter"];
        const std::size_t trace_before = c.session->world().trace().size();
        json r = c.ok("retry", {{"depth", depth}});
        v.expect(r["verdict"] == "safe", "full-mode retry judged unsafe");
        ++retries;
        const std::int64_t after = c.counter();
        if (after != entry) {
          v.expect(false, "counter " + std::to_string(after) + " after retry, entry was " + std::to_string(entry));
        }
        v.expect(c.session->world().trace().size() == trace_before, "retry itself touched the backend");
        replay_until = std::max(replay_until.value_or(0), before);
      }
      // no backend invocation for numbers already executed
      const auto& records = c.session->world().trace().records();
      std::map<ActionNumber, int> per_number;
      for (const auto& rec : records) ++per_number[rec.action_number];
      for (const auto& [n, k] : per_number) {
        if (k != 1) v.expect(false, "action " + std::to_string(n) + " reached the backend " + std::to_string(k) + " times");
      }
    }
  }
  v.expect(retries > 100, "too few retries exercised");
  v.expect(replays_checked > 100, "too few replays observed");
}

// Manual region on region.tardi. main writes 0..9, f writes 10..19, g writes
// 20..24 then 25..29. Breakpoints: 26 (main, before f; counter 10), 20 (f,
// before g; counter 20), 13 (g, between its halves; counter 25), 14 (g, after
// both; counter 30). g is frame 2 with entry counter 20, f is frame 1 with 10.
struct RegionCase {
  std::string label;
  std::vector<std::pair<std::string, std::string>> script; // (break location, table action or "")
  std::int64_t depth;
  bool expect_safe;
};

void region_matrix(Verdict& v) {
  const RegionCase cases[] = {
      {"inside", {{"26", "start"}, {"13", ""}}, 2, true},                 // g [20,25) in [10,...)
      {"straddling start", {{"20", "start"}, {"14", ""}}, 1, false},      // f [10,30) vs [20,...)
      {"straddling end", {{"26", "start"}, {"13", "stop"}, {"14", ""}}, 2, false}, // g [20,30) vs [10,25)
      {"outside", {{"26", "start"}, {"20", "stop"}, {"14", ""}}, 2, false},        // g [20,30) vs [10,20)
  };
  for (const RegionCase& rc : cases) {
    Client c("region", tabling::Mode::manual);
    for (const auto& [where, action] : rc.script) {
      c.ok("break", {{"location", where}});
      json stop = c.ok("continue");
      if (stop["event"]["payload"]["reason"] != "breakpoint") throw Error(rc.label + ": missed breakpoint " + where);
      if (!action.empty()) c.ok("table", {{"action", action}});
    }
    json safety = c.ok("safety", {{"depth", rc.depth}});
    const bool safe = safety["verdict"] == "safe";
    v.expect(safe == rc.expect_safe, rc.label + ": verdict " + safety["verdict"].get<std::string>());

    const json stack_before = c.ok("stack");
    const std::string trace_before = c.trace();
    auto [evs, r] = c.call("retry", {{"depth", rc.depth}});
    if (!r.ok) throw Error(rc.label + ": retry failed: " + r.message);
    if (rc.expect_safe) {
      v.expect(r.body["retried"] == true, rc.label + ": safe retry did not happen");
      continue;
    }
    v.expect(!evs.empty() && evs[0].type == "warning", rc.label + ": first event is not a warning");
    v.expect(evs.size() == 1, rc.label + ": events besides the warning");
    v.expect(r.body["retried"] == false && r.body["needs_confirm"] == true, rc.label + ": retry went ahead");
    v.expect(c.ok("stack") == stack_before, rc.label + ": stack changed before confirmation");
    v.expect(c.trace() == trace_before, rc.label + ": trace changed before confirmation");
    auto [confirm_events, cr] = c.call("confirm");
    v.expect(cr.ok && cr.body["retried"] == true, rc.label + ": confirm did not retry");
    v.expect(!confirm_events.empty() && confirm_events[0].type == "retried", rc.label + ": no retried event");
    v.expect(c.counter() == stack_before["frames"][rc.depth]["io_counter_on_entry"], rc.label + ": counter not reset");
  }
}

void divergence(Verdict& v) {
  // diverge.tardi reads "yes" first and "no" when the read is repeated.
  Client c("diverge", tabling::Mode::manual);
  c.ok("break", {{"location", "act"}});
  c.ok("continue");
  c.ok("table", {{"action", "start"}}); // the read_line stays untabled
  c.ok("break", {{"location", "16"}});
  c.ok("continue");
  json r = c.ok("retry", {{"depth", 0}});
  v.expect(r["needs_confirm"] == true, "retry across the untabled read was not flagged");
  c.ok("confirm");
  c.ok("clear");
  auto [evs, cont] = c.call("continue");
  std::size_t n = 0;
  for (const Event& e : c.events) n += e.type == "divergence";
  v.expect(n == 1, std::to_string(n) + " divergence events");
  v.expect(cont.ok && cont.body["event"]["type"] == "divergence", "continue did not report the divergence");
  auto [more, again] = c.call("continue");
  v.expect(!again.ok && again.error == "rejected", "forward command accepted after divergence");
  for (const Event& e : more) n += e.type == "divergence";
  v.expect(n == 1, "divergence reported more than once");
  v.expect(c.ok("quit")["exit_code"] == 3, "exit code is not 3");
}

struct OverheadRun {
  double seconds;
  std::size_t stored_values;
  std::size_t capacity;
  ActionNumber high_water;
  std::size_t expected_values; // from the effects trace
  std::string output;
};

io::ScriptConfig overhead_world() {
  io::ScriptConfig c;
  for (int i = 0; i < 50000; ++i) c.stdin_text += static_cast<char>('a' + i % 26);
  return c;
}

OverheadRun overhead_run(const std::shared_ptr<const lang::CheckedProgram>& program, tabling::Mode mode,
                         vm::Dispatch dispatch) {
  auto backend = std::make_unique<io::ScriptedBackend>(overhead_world());
  io::ScriptedBackend* b = backend.get();
  io::World world(std::move(backend));
  tabling::TablingState tabling(mode);
  vm::Machine machine(program, world, tabling, dispatch);
  const auto t0 = Clock::now();
  const int code = machine.run_to_completion();
  const double took = seconds_since(t0);
  if (code != 0) throw Error("overhead program failed: " + machine.error());
  std::size_t expected = 0;
  for (const auto& r : world.trace().records()) expected += r.inputs.size() + r.outputs.size() + 1;
  return {took, tabling.table().stored_value_count(), tabling.table().capacity(), tabling.high_water(), expected,
          b->stdout_text()};
}

void overhead(Verdict& v) {
  const auto t0 = Clock::now();
  auto program = testing::load_program("overhead");
  double best_off = 1e9, best_flag = 1e9, best_full = 1e9;
  OverheadRun full_run{};
  // Interleaved so drift in machine load hits all three alike.
  for (int round = 0; round < 7; ++round) {
    best_flag = std::min(best_flag, overhead_run(program, tabling::Mode::off, vm::Dispatch::flag_test).seconds);
    best_off = std::min(best_off, overhead_run(program, tabling::Mode::off, vm::Dispatch::tabled).seconds);
    full_run = overhead_run(program, tabling::Mode::full, vm::Dispatch::tabled);
    best_full = std::min(best_full, full_run.seconds);
  }
  std::ostringstream timing;
  timing.precision(4);
  timing << "off " << best_off << " s, flag-test " << best_flag << " s, full " << best_full << " s";
  std::cout << "  overhead: " << timing.str() << std::endl;
  v.expect(best_full <= 3 * best_off, "full > 3x off (" + timing.str() + ")");
  v.expect(best_off <= 1.10 * best_flag && best_flag <= 1.10 * best_off, "off not within 10% of flag-test (" + timing.str() + ")");
  v.expect(full_run.high_water == 100000, "high water " + std::to_string(full_run.high_water));
  v.expect(full_run.stored_values == full_run.expected_values,
           "stored " + std::to_string(full_run.stored_values) + " values, expected " +
               std::to_string(full_run.expected_values));
  v.expect(full_run.expected_values == 50000 * 3 + 50000 * 4, "trace does not hold 50000 reads and 50000 writes");
  v.expect(full_run.capacity <= 2 * full_run.high_water, "capacity " + std::to_string(full_run.capacity));
  v.expect(full_run.output == std::string(50000, 'x'), "unexpected program output");
  const double took = seconds_since(t0);
  v.expect(took < 30.0, "took " + std::to_string(took) + " s");
}

void table_growth(Verdict& v) {
  const std::pair<std::size_t, std::size_t> expected[] = {{1, 64}, {64, 64}, {65, 128}, {4096, 4096}, {4097, 8192}};
  for (auto [k, cap] : expected) {
    tabling::IoActionTable table;
    v.expect(table.capacity() == 64, "initial capacity " + std::to_string(table.capacity()));
    for (std::size_t i = 0; i < k; ++i) table.create(i, "write_string", {}, 1);
    v.expect(table.capacity() == cap,
             std::to_string(k) + " actions: capacity " + std::to_string(table.capacity()) + ", want " + std::to_string(cap));
  }
}

void replay_fidelity(Verdict& v) {
  std::mt19937_64 rng(4242);
  tabling::TablingState state(tabling::Mode::full);
  std::vector<std::vector<Value>> originals;
  for (int i = 0; i < 1000; ++i) {
    const ActionNumber n = state.allocate_action_number();
    std::vector<Value> outs;
    for (int k = 1 + static_cast<int>(rng() % 3); k > 0; --k) outs.push_back(testing::random_value(rng, 3));
    tabling::AnswerBlock& block = state.create_answer_block(n, "case", {testing::random_value(rng)}, outs.size());
    for (std::size_t k = 0; k < outs.size(); ++k) block.save_answer(k, outs[k]);
    originals.push_back(std::move(outs));
  }
  state.reset_counter(0);
  for (int i = 0; i < 1000; ++i) {
    const ActionNumber n = state.allocate_action_number();
    const tabling::AnswerBlock* block = state.io_has_occurred(n);
    if (!block) {
      v.expect(false, "no block for " + std::to_string(n));
      continue;
    }
    for (std::size_t k = 0; k < originals[i].size(); ++k) {
      if (!(block->restore_answer(k) == originals[i][k])) {
        v.expect(false, "case " + std::to_string(i) + " output " + std::to_string(k) + " changed");
      }
    }
  }
}

} // namespace

int main() {
  report("at-most-once: retried scenarios reproduce the straight trace", at_most_once);
  report("double-close prevented by tabling, reproduced without it", double_close);
  report("resource leak prevented by tabling, reproduced without it", resource_leak);
  report("counter reset: retries rewind to the frame entry and replay", counter_reset);
  report("region safety matrix and warning before state change", region_matrix);
  report("divergence detection halts with exit code 3", divergence);
  report("overhead on 100000 scripted I/O actions", overhead);
  report("table growth from capacity 64 by doubling", table_growth);
  report("replay fidelity of random values", replay_fidelity);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
