#include "tardi/debugger/session.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace tardi::debugger {

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
  case StopReason::breakpoint: return "breakpoint";
  case StopReason::step_complete: return "step-complete";
  case StopReason::entry: return "entry";
  case StopReason::fault: return "fault";
  }
  return "?";
}

namespace {

void collect_lines(const lang::Block& block, std::vector<int>& lines) {
  for (const lang::Stmt& s : block) {
    lines.push_back(s.span.line);
    collect_lines(s.then_block, lines);
    collect_lines(s.else_block, lines);
    for (const lang::StmtArm& arm : s.arms) collect_lines(arm.body, lines);
  }
}

std::optional<int> parse_line(std::string_view text) {
  int line = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), line);
  if (ec != std::errc() || end != text.data() + text.size() || line <= 0) return std::nullopt;
  return line;
}

std::string_view base_name(std::string_view path) {
  auto slash = path.find_last_of('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

} // namespace

Session::Session(std::shared_ptr<const lang::CheckedProgram> program, std::unique_ptr<io::IoBackend> backend,
                 Settings settings)
    : program_(std::move(program)), settings_(std::move(settings)), world_(std::move(backend)),
      tabling_(settings_.mode), machine_(program_, world_, tabling_) {
  machine_.pause("entry");
  open_calls_.push_back({program_->procedure(program_->entry).name, tabling_.counter()});
}

void Session::cmd_break(std::string_view where) {
  if (where.empty()) throw NoSuchLocation("empty breakpoint location");
  std::string_view line_text = where;
  auto colon = where.rfind(':');
  if (colon != std::string_view::npos) {
    std::string_view file = where.substr(0, colon);
    if (settings_.source_name.empty() ||
        (file != settings_.source_name && file != base_name(settings_.source_name))) {
      throw NoSuchLocation("no source file " + std::string(file));
    }
    line_text = where.substr(colon + 1);
    if (!parse_line(line_text)) throw NoSuchLocation("bad line number in " + std::string(where));
  }

  if (auto line = parse_line(line_text)) {
    std::vector<int> lines;
    for (const lang::Procedure& p : program_->program.procedures) collect_lines(p.body, lines);
    if (std::find(lines.begin(), lines.end(), *line) == lines.end()) {
      throw NoSuchLocation("no statement on line " + std::to_string(*line));
    }
    breakpoints_.push_back({"", *line});
    return;
  }
  if (program_->find_procedure(where) < 0) throw NoSuchLocation("no procedure named " + std::string(where));
  breakpoints_.push_back({std::string(where), 0});
}

bool Session::hits_breakpoint(const vm::StmtEvent& ev) const {
  for (const Breakpoint& bp : breakpoints_) {
    if (!bp.proc.empty() ? (ev.at_entry && ev.proc == bp.proc) : ev.span.line == bp.line) return true;
  }
  return false;
}

void Session::require_loaded() const {
  if (halted_) throw CommandRejected("session halted after divergence; only inspection and quit are allowed");
  if (machine_.status() == vm::Status::exited) throw CommandRejected("program has exited");
  if (machine_.status() == vm::Status::error) throw CommandRejected("program faulted: " + machine_.error());
}

void Session::require_forward() const {
  require_loaded();
  if (pending_retry_) throw CommandRejected("a retry is waiting for confirm or abort");
}

void Session::emit(const DebugEvent& ev) {
  if (sink_) sink_(ev);
}

Location Session::location_of(std::size_t depth) const {
  const auto& frames = machine_.frames();
  if (depth >= frames.size()) return {};
  auto span = machine_.location(depth);
  return Location{frames[depth].proc->name, span.value_or(lang::Span{})};
}

DebugEvent Session::run(const StopPredicate& stop_here) {
  require_forward();
  machine_.resume();
  for (;;) {
    vm::VmEvent ev = machine_.step_event();
    if (auto* call = std::get_if<vm::CallEvent>(&ev)) {
      open_calls_.push_back({call->callee, call->io_counter});
    } else if (auto* exit = std::get_if<vm::ExitEvent>(&ev)) {
      OpenCall open = std::move(open_calls_.back());
      open_calls_.pop_back();
      completed_calls_.push_back({next_call_id_++, std::move(open.proc), exit->depth, open.entry_counter,
                                  exit->io_counter});
      if (completed_calls_.size() > call_history_limit) completed_calls_.pop_front();
    } else if (auto* io = std::get_if<vm::IoEvent>(&ev)) {
      emit(IoActionEvent{io->record});
    } else if (auto* stmt = std::get_if<vm::StmtEvent>(&ev)) {
      const bool at_bp = hits_breakpoint(*stmt);
      if (at_bp || stop_here(*stmt)) {
        StopReason reason = at_bp ? StopReason::breakpoint : StopReason::step_complete;
        machine_.pause(std::string(stop_reason_name(reason)));
        StoppedEvent stopped{reason, Location{stmt->proc, stmt->span}, stmt->depth, ""};
        emit(stopped);
        return stopped;
      }
    } else if (auto* exited = std::get_if<vm::ExitedEvent>(&ev)) {
      open_calls_.clear();
      ExitedEvent out{exited->code};
      emit(out);
      return out;
    } else if (auto* fault = std::get_if<vm::FaultEvent>(&ev)) {
      if (fault->divergence) {
        halted_ = true;
        const tabling::Divergence& d = *fault->divergence;
        DivergenceEvent out{d.number, d.recorded_name, d.recorded_inputs, d.attempted_name, d.attempted_inputs,
                            fault->description};
        divergence_ = out;
        emit(out);
        return out;
      }
      const std::size_t depth = machine_.frames().empty() ? 0 : machine_.frames().size() - 1;
      StoppedEvent out{StopReason::fault, location_of(depth), depth, fault->description};
      emit(out);
      return out;
    }
  }
}

DebugEvent Session::cmd_continue() {
  return run([](const vm::StmtEvent&) { return false; });
}

DebugEvent Session::cmd_step() {
  return run([](const vm::StmtEvent&) { return true; });
}

DebugEvent Session::cmd_next() {
  require_forward();
  const std::size_t depth = machine_.frames().size() - 1;
  return run([depth](const vm::StmtEvent& ev) { return ev.depth <= depth; });
}

DebugEvent Session::cmd_finish() {
  require_forward();
  const std::size_t depth = machine_.frames().size() - 1;
  return run([depth](const vm::StmtEvent& ev) { return ev.depth < depth; });
}

RetrySafetyReport Session::safety_check(std::size_t target_depth) const {
  const auto& frames = machine_.frames();
  if (target_depth >= frames.size()) {
    throw vm::BadDepth("no frame at depth " + std::to_string(target_depth) + " (stack height " +
                       std::to_string(frames.size()) + ")");
  }
  RetrySafetyReport r;
  r.target_depth = target_depth;
  r.entry_counter = frames[target_depth].io_counter_on_entry;
  r.current_counter = tabling_.counter();
  r.n_actions_crossed = r.current_counter - r.entry_counter;
  r.n_untabled = tabling_.count_untabled(r.entry_counter, r.current_counter);
  r.all_tabled = tabling_.region_contains(r.entry_counter, r.current_counter);
  if (!r.all_tabled) {
    r.reason = std::to_string(r.n_untabled) + " untabled I/O action" + (r.n_untabled == 1 ? "" : "s") +
               " would re-execute";
  }
  return r;
}

DebugEvent Session::cmd_retry(std::size_t target_depth, bool confirm_unsafe) {
  require_loaded();
  RetrySafetyReport report = safety_check(target_depth);
  if (!report.safe() && !confirm_unsafe) {
    pending_retry_ = target_depth;
    WarningEvent warning{"retry of frame " + std::to_string(target_depth) + " is unsafe: " + report.reason, true,
                         report};
    emit(warning);
    return warning;
  }
  pending_retry_.reset();
  tabling_.reset_counter(report.entry_counter);
  machine_.pop_to_frame(target_depth);
  machine_.pause("retry");
  open_calls_.resize(target_depth + 1);
  RetriedEvent out{target_depth, tabling_.counter(), location_of(target_depth)};
  emit(out);
  return out;
}

DebugEvent Session::confirm() {
  if (!pending_retry_) throw CommandRejected("no retry is waiting for confirmation");
  return cmd_retry(*pending_retry_, true);
}

DebugEvent Session::abort() {
  if (!pending_retry_) throw CommandRejected("no retry is waiting for confirmation");
  pending_retry_.reset();
  return status_event();
}

CallIoSummary Session::materialize(ActionNumber entry, ActionNumber exit) const {
  if (!tabling_.region_contains(entry, exit)) {
    throw NotTabled("I/O actions " + std::to_string(entry) + ".." + std::to_string(exit) +
                    " are not all inside the tabled region");
  }
  CallIoSummary out{entry, exit, {}};
  for (ActionNumber n = entry; n < exit; ++n) {
    const tabling::AnswerBlock* b = tabling_.table().find(n);
    if (!b) continue;
    tabling::IoActionRecord rec{n, b->name(), b->inputs(), {}, b->replay_count() > 0, true};
    for (std::size_t i = 0; i < b->n_outputs(); ++i) {
      rec.outputs.push_back(b->output_set(i) ? b->restore_answer(i) : Value(Unit{}));
    }
    out.actions.push_back(std::move(rec));
  }
  return out;
}

CallIoSummary Session::list_io_actions(std::size_t depth) const {
  const auto& frames = machine_.frames();
  if (depth >= frames.size()) {
    throw vm::BadDepth("no frame at depth " + std::to_string(depth) + " (stack height " +
                       std::to_string(frames.size()) + ")");
  }
  return materialize(frames[depth].io_counter_on_entry, tabling_.counter());
}

CallIoSummary Session::list_call_io_actions(std::uint64_t call_id) const {
  for (const CallRecord& c : completed_calls_) {
    if (c.id == call_id) return materialize(c.entry_counter, c.exit_counter);
  }
  throw NoSuchLocation("no recent call with id " + std::to_string(call_id));
}

Value Session::cmd_print(std::string_view name) const {
  if (machine_.frames().empty()) throw UnboundVariable("no active frame");
  return cmd_print(name, machine_.frames().size() - 1);
}

Value Session::cmd_print(std::string_view name, std::size_t depth) const {
  if (depth >= machine_.frames().size()) {
    throw vm::BadDepth("no frame at depth " + std::to_string(depth));
  }
  const Value* v = machine_.lookup(depth, name);
  if (!v) throw UnboundVariable(std::string(name) + " is not bound here");
  return *v;
}

void Session::cmd_table_start() {
  require_loaded();
  tabling_.start_tabling();
}

void Session::cmd_table_stop() {
  require_loaded();
  tabling_.stop_tabling();
}

void Session::cmd_trace_dump(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << trace_text();
}

DebugEvent Session::status_event() const {
  if (halted_) return *divergence_;
  switch (machine_.status()) {
  case vm::Status::exited: return ExitedEvent{machine_.exit_code()};
  case vm::Status::error: {
    const std::size_t depth = machine_.frames().empty() ? 0 : machine_.frames().size() - 1;
    return StoppedEvent{StopReason::fault, location_of(depth), depth, machine_.error()};
  }
  default: break;
  }
  const std::size_t depth = machine_.frames().size() - 1;
  const std::string& why = machine_.stop_reason();
  StopReason reason = why == "breakpoint" ? StopReason::breakpoint
                      : why == "entry"    ? StopReason::entry
                                          : StopReason::step_complete;
  return StoppedEvent{reason, location_of(depth), depth, ""};
}

int Session::exit_code() const {
  if (halted_) return 3;
  if (machine_.status() == vm::Status::error) return 2;
  return 0;
}

} // namespace tardi::debugger
