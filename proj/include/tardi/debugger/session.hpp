#pragma once

#include "tardi/io/world.hpp"
#include "tardi/lang/checker.hpp"
#include "tardi/tabling/tabling.hpp"
#include "tardi/vm/machine.hpp"

#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tardi::debugger {

class NoSuchLocation : public Error {
public:
  using Error::Error;
};

class NotTabled : public Error {
public:
  using Error::Error;
};

class UnboundVariable : public Error {
public:
  using Error::Error;
};

/// A command that the session's current state does not allow.
class CommandRejected : public Error {
public:
  using Error::Error;
};

struct Location {
  std::string proc;
  lang::Span span;
};

enum class StopReason { breakpoint, step_complete, entry, fault };
std::string_view stop_reason_name(StopReason reason);

struct RetrySafetyReport {
  std::size_t target_depth = 0;
  ActionNumber entry_counter = 0;
  ActionNumber current_counter = 0;
  ActionNumber n_actions_crossed = 0;
  ActionNumber n_untabled = 0;
  bool all_tabled = true;
  bool safe() const { return all_tabled; }
  std::string reason; // empty when safe
};

struct CallIoSummary {
  ActionNumber entry_counter = 0;
  ActionNumber exit_counter = 0;
  std::vector<tabling::IoActionRecord> actions;
};

/// Entry/exit counters of a completed call.
struct CallRecord {
  std::uint64_t id = 0;
  std::string proc;
  std::size_t depth = 0;
  ActionNumber entry_counter = 0;
  ActionNumber exit_counter = 0;
};

struct StoppedEvent {
  StopReason reason = StopReason::entry;
  Location location;
  std::size_t depth = 0;
  std::string detail; // fault description
};
struct IoActionEvent {
  tabling::IoActionRecord record;
};
struct WarningEvent {
  std::string text;
  bool requires_confirmation = false;
  std::optional<RetrySafetyReport> report;
};
struct DivergenceEvent {
  ActionNumber number = 0;
  std::string recorded_name;
  std::vector<Value> recorded_inputs;
  std::string attempted_name;
  std::vector<Value> attempted_inputs;
  std::string description;
};
struct ExitedEvent {
  int code = 0;
};
struct RetriedEvent {
  std::size_t depth = 0;
  ActionNumber counter = 0;
  Location location;
};

using DebugEvent =
    std::variant<StoppedEvent, IoActionEvent, WarningEvent, DivergenceEvent, ExitedEvent, RetriedEvent>;

class Session {
public:
  static constexpr std::size_t call_history_limit = 4096;

  struct Settings {
    tabling::Mode mode = tabling::Mode::full;
    std::string source_name; // file name used by `file:line` breakpoints
  };

  using EventSink = std::function<void(const DebugEvent&)>;

  /// Loads the program and stops at entry, before its first statement.
  Session(std::shared_ptr<const lang::CheckedProgram> program, std::unique_ptr<io::IoBackend> backend,
          Settings settings);

  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

  /// `proc`, `line`, or `file:line`. Throws NoSuchLocation.
  void cmd_break(std::string_view where);
  void cmd_clear_breakpoints() { breakpoints_.clear(); }

  DebugEvent cmd_continue();
  DebugEvent cmd_step();
  DebugEvent cmd_next();
  DebugEvent cmd_finish();

  /// Jumps back to the start of the active call at `target_depth`. If the jump
  /// crosses untabled actions and `confirm_unsafe` is false, emits a warning
  /// and waits for confirm()/abort() without changing any state.
  DebugEvent cmd_retry(std::size_t target_depth, bool confirm_unsafe);
  DebugEvent confirm();
  DebugEvent abort();
  std::optional<std::size_t> pending_retry() const { return pending_retry_; }

  RetrySafetyReport safety_check(std::size_t target_depth) const;

  /// Actions performed by the active call at `depth` so far.
  CallIoSummary list_io_actions(std::size_t depth) const;
  /// Actions performed by a completed call from the recent-call history.
  CallIoSummary list_call_io_actions(std::uint64_t call_id) const;
  const std::deque<CallRecord>& recent_calls() const { return completed_calls_; }

  Value cmd_print(std::string_view name) const;
  Value cmd_print(std::string_view name, std::size_t depth) const;
  std::vector<vm::FrameSummary> cmd_stack() const { return machine_.current_stack(); }
  std::string cmd_io_table() const { return tabling::dump_table(tabling_); }
  void cmd_table_start();
  void cmd_table_stop();
  void cmd_trace_dump(const std::filesystem::path& file) const;
  std::string trace_text() const { return io::dump_trace(world_.trace()); }

  /// Where the session is currently stopped (or why it is not).
  DebugEvent status_event() const;

  bool halted() const { return halted_; }
  bool exited() const { return machine_.status() == vm::Status::exited; }
  bool faulted() const { return machine_.status() == vm::Status::error; }
  /// 0 normal, 2 program fault, 3 divergence halt.
  int exit_code() const;

  vm::Machine& machine() { return machine_; }
  const vm::Machine& machine() const { return machine_; }
  tabling::TablingState& tabling() { return tabling_; }
  const tabling::TablingState& tabling() const { return tabling_; }
  io::World& world() { return world_; }
  const io::World& world() const { return world_; }
  const lang::CheckedProgram& program() const { return *program_; }

private:
  struct Breakpoint {
    std::string proc; // empty for line breakpoints
    int line = 0;
  };
  struct OpenCall {
    std::string proc;
    ActionNumber entry_counter = 0;
  };

  using StopPredicate = std::function<bool(const vm::StmtEvent&)>;

  DebugEvent run(const StopPredicate& stop_here);
  void require_forward() const;
  void require_loaded() const;
  bool hits_breakpoint(const vm::StmtEvent& ev) const;
  Location location_of(std::size_t depth) const;
  void emit(const DebugEvent& ev);
  CallIoSummary materialize(ActionNumber entry, ActionNumber exit) const;

  std::shared_ptr<const lang::CheckedProgram> program_;
  Settings settings_;
  io::World world_;
  tabling::TablingState tabling_;
  vm::Machine machine_;
  EventSink sink_;
  std::vector<Breakpoint> breakpoints_;
  std::vector<OpenCall> open_calls_;
  std::deque<CallRecord> completed_calls_;
  std::uint64_t next_call_id_ = 0;
  std::optional<std::size_t> pending_retry_;
  bool halted_ = false;
  std::optional<DivergenceEvent> divergence_;
};

} // namespace tardi::debugger
