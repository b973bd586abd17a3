#pragma once

#include "tardi/io/world.hpp"
#include "tardi/lang/checker.hpp"
#include "tardi/tabling/tabling.hpp"
#include "tardi/value.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tardi::vm {

class BadDepth : public Error {
public:
  using Error::Error;
};

/// One activation record.
struct Frame {
  struct Cursor {
    const lang::Block* block = nullptr;
    std::size_t index = 0;
  };

  int proc_index = -1;
  const lang::Procedure* proc = nullptr;
  std::vector<std::optional<Value>> env; // single-assignment slots; params first
  std::vector<Value> args;
  std::vector<Cursor> cursor; // innermost block last
  bool announced = false;     // a stmt event was emitted for the current statement
  lang::Span call_site;
  ActionNumber io_counter_on_entry = 0; // global action counter when the frame was pushed
  std::size_t depth = 0;
};

struct FrameSummary {
  std::size_t depth = 0;
  std::string proc;
  lang::Span call_site;
  ActionNumber io_counter_on_entry = 0;
  lang::Span location;
};

struct CallEvent {
  std::string callee;
  std::vector<Value> args;
  std::size_t depth = 0;
  ActionNumber io_counter = 0;
};
struct ExitEvent {
  std::string callee;
  std::vector<Value> outputs;
  std::size_t depth = 0;
  ActionNumber io_counter = 0;
};
struct StmtEvent {
  lang::Span span;
  std::size_t depth = 0;
  std::string proc;
  bool at_entry = false; // first statement of the procedure body
};
struct IoEvent {
  tabling::IoActionRecord record;
  std::size_t depth = 0;
};
struct ExitedEvent {
  int code = 0;
};
struct FaultEvent {
  std::string description;
  std::optional<tabling::Divergence> divergence;
};

using VmEvent = std::variant<CallEvent, ExitEvent, StmtEvent, IoEvent, ExitedEvent, FaultEvent>;

enum class Status { running, stopped, exited, error };

/// How effectful primitive calls reach the world. `flag_test` is the
/// comparison baseline: check the enabled flag and call the backend directly.
enum class Dispatch { tabled, flag_test };

class Machine {
public:
  /// Pushes the entry frame with io_counter_on_entry = the current counter.
  Machine(std::shared_ptr<const lang::CheckedProgram> program, io::World& world,
          tabling::TablingState& tabling, Dispatch dispatch = Dispatch::tabled);

  /// Runs until the next event. Requires status running.
  VmEvent step_event();

  /// Discards frames above `depth` and restarts that frame from its first
  /// statement with only its arguments bound. The I/O counter is not touched.
  void pop_to_frame(std::size_t depth);

  std::vector<FrameSummary> current_stack() const;
  const std::vector<Frame>& frames() const { return stack_; }

  Status status() const { return status_; }
  const std::string& stop_reason() const { return stop_reason_; }
  int exit_code() const { return exit_code_; }
  const std::string& error() const { return error_; }
  void pause(std::string reason);
  void resume();

  /// Statement the top frame will execute next (or its closing brace).
  std::optional<lang::Span> location() const;
  std::optional<lang::Span> location(std::size_t depth) const;

  /// Value bound to `name` in the frame at `depth`, or nullptr if unbound.
  const Value* lookup(std::size_t depth, std::string_view name) const;

  const lang::CheckedProgram& program() const { return *program_; }
  tabling::TablingState& tabling() { return tabling_; }
  io::World& world() { return world_; }

  /// Steps until the program exits or faults; returns the exit code (0) or -1 on fault.
  int run_to_completion();

private:
  class Fault;

  Value eval(const lang::Expr& e, const Frame& f);
  Value eval_binary(const lang::Expr& e, const Frame& f);
  bool match(const lang::Pattern& p, const Value& v, std::vector<std::pair<const lang::Pattern*, Value>>& out);
  void bind(Frame& f, int slot, Value v);
  void advance(Frame& f);
  const lang::Stmt* current_statement(const Frame& f) const;
  VmEvent finish_call(std::vector<Value> outputs);
  tabling::IoActionRecord dispatch(const PrimitiveDescriptor& d, std::span<const Value> inputs);
  void push_frame(int proc_index, std::vector<Value> args, lang::Span call_site);

  std::shared_ptr<const lang::CheckedProgram> program_;
  io::World& world_;
  tabling::TablingState& tabling_;
  Dispatch dispatch_;
  std::vector<Frame> stack_;
  std::vector<Value> scoped_; // bindings of enclosing match expressions
  Status status_ = Status::running;
  std::string stop_reason_;
  int exit_code_ = 0;
  std::string error_;
};

} // namespace tardi::vm
