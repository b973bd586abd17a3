#include "tardi/vm/machine.hpp"

#include <limits>

namespace tardi::vm {

using lang::BinaryOp;
using lang::Expr;
using lang::Pattern;
using lang::Stmt;
using lang::Storage;

class Machine::Fault : public Error {
public:
  using Error::Error;
};

Machine::Machine(std::shared_ptr<const lang::CheckedProgram> program, io::World& world,
                 tabling::TablingState& tabling, Dispatch dispatch)
    : program_(std::move(program)), world_(world), tabling_(tabling), dispatch_(dispatch) {
  push_frame(program_->entry, {}, lang::Span{});
}

void Machine::push_frame(int proc_index, std::vector<Value> args, lang::Span call_site) {
  const lang::Procedure& proc = program_->procedure(proc_index);
  Frame f;
  f.proc_index = proc_index;
  f.proc = &proc;
  f.env.resize(proc.slot_names.size());
  for (std::size_t i = 0; i < args.size(); ++i) f.env[i] = args[i];
  f.args = std::move(args);
  f.cursor.push_back({&proc.body, 0});
  f.call_site = call_site;
  f.io_counter_on_entry = tabling_.counter();
  f.depth = stack_.size();
  stack_.push_back(std::move(f));
}

void Machine::pause(std::string reason) {
  if (status_ == Status::running || status_ == Status::stopped) {
    status_ = Status::stopped;
    stop_reason_ = std::move(reason);
  }
}

void Machine::resume() {
  if (status_ == Status::stopped) status_ = Status::running;
}

const lang::Stmt* Machine::current_statement(const Frame& f) const {
  for (auto it = f.cursor.rbegin(); it != f.cursor.rend(); ++it) {
    if (it->index < it->block->size()) return &(*it->block)[it->index];
  }
  return nullptr;
}

std::optional<lang::Span> Machine::location(std::size_t depth) const {
  if (depth >= stack_.size()) return std::nullopt;
  const Frame& f = stack_[depth];
  if (const Stmt* s = current_statement(f)) return s->span;
  return f.proc->end_span;
}

std::optional<lang::Span> Machine::location() const {
  if (stack_.empty()) return std::nullopt;
  return location(stack_.size() - 1);
}

const Value* Machine::lookup(std::size_t depth, std::string_view name) const {
  if (depth >= stack_.size()) return nullptr;
  const Frame& f = stack_[depth];
  for (std::size_t i = 0; i < f.proc->slot_names.size(); ++i) {
    if (f.proc->slot_names[i] == name) return f.env[i] ? &*f.env[i] : nullptr;
  }
  return nullptr;
}

std::vector<FrameSummary> Machine::current_stack() const {
  std::vector<FrameSummary> out;
  out.reserve(stack_.size());
  for (const Frame& f : stack_) {
    out.push_back(FrameSummary{f.depth, f.proc->name, f.call_site, f.io_counter_on_entry, *location(f.depth)});
  }
  return out;
}

void Machine::pop_to_frame(std::size_t depth) {
  if (depth >= stack_.size()) {
    throw BadDepth("no frame at depth " + std::to_string(depth) + " (stack height " +
                   std::to_string(stack_.size()) + ")");
  }
  stack_.resize(depth + 1);
  Frame& f = stack_.back();
  std::fill(f.env.begin(), f.env.end(), std::nullopt);
  for (std::size_t i = 0; i < f.args.size(); ++i) f.env[i] = f.args[i];
  f.cursor.clear();
  f.cursor.push_back({&f.proc->body, 0});
  // The machine is now stopped *at* the first statement.
  f.announced = true;
  scoped_.clear();
}

void Machine::bind(Frame& f, int slot, Value v) {
  auto& cell = f.env.at(static_cast<std::size_t>(slot));
  if (cell) throw Fault("internal: slot " + f.proc->slot_names[static_cast<std::size_t>(slot)] + " rebound");
  cell = std::move(v);
}

void Machine::advance(Frame& f) {
  ++f.cursor.back().index;
  f.announced = false;
}

int Machine::run_to_completion() {
  resume();
  while (status_ == Status::running) step_event();
  return status_ == Status::exited ? exit_code_ : -1;
}

tabling::IoActionRecord Machine::dispatch(const PrimitiveDescriptor& d, std::span<const Value> inputs) {
  if (dispatch_ == Dispatch::flag_test && !tabling_.enabled()) {
    tabling::IoActionRecord r;
    r.name = d.name;
    r.inputs.assign(inputs.begin(), inputs.end());
    r.number = world_.trace().size();
    r.outputs = world_.perform(d, inputs, r.number);
    return r;
  }
  return tabling::idempotent_execute(tabling_, world_, d, inputs);
}

VmEvent Machine::finish_call(std::vector<Value> outputs) {
  if (stack_.size() == 1) {
    stack_.clear();
    status_ = Status::exited;
    exit_code_ = 0;
    return ExitedEvent{0};
  }
  Frame callee = std::move(stack_.back());
  stack_.pop_back();
  Frame& caller = stack_.back();
  const Stmt* call = current_statement(caller);
  for (std::size_t i = 0; i < call->targets.size(); ++i) {
    if (call->targets[i].slot >= 0) bind(caller, call->targets[i].slot, outputs[i]);
  }
  advance(caller);
  return ExitEvent{callee.proc->name, std::move(outputs), callee.depth, tabling_.counter()};
}

VmEvent Machine::step_event() {
  if (status_ != Status::running) throw Error("machine is not running");
  try {
    for (;;) {
      Frame& f = stack_.back();
      while (!f.cursor.empty() && f.cursor.back().index >= f.cursor.back().block->size()) f.cursor.pop_back();
      if (f.cursor.empty()) return finish_call({});

      const Stmt& s = (*f.cursor.back().block)[f.cursor.back().index];
      if (!f.announced) {
        f.announced = true;
        bool at_entry = f.cursor.size() == 1 && f.cursor.back().index == 0;
        return StmtEvent{s.span, f.depth, f.proc->name, at_entry};
      }

      scoped_.clear();
      switch (s.kind) {
      case Stmt::Kind::let: {
        Value v = eval(s.value, f);
        bind(f, s.targets[0].slot, std::move(v));
        advance(f);
        break;
      }
      case Stmt::Kind::call: {
        std::vector<Value> args;
        args.reserve(s.args.size());
        for (const Expr& a : s.args) args.push_back(eval(a, f));
        if (s.callee_kind == lang::CalleeKind::user) {
          std::vector<Value> shown = args;
          push_frame(s.callee_index, std::move(args), s.span);
          const Frame& callee = stack_.back();
          return CallEvent{callee.proc->name, std::move(shown), callee.depth, callee.io_counter_on_entry};
        }
        const PrimitiveDescriptor& d = program_->primitives[static_cast<std::size_t>(s.callee_index)];
        if (!d.effectful) {
          std::vector<Value> outputs = io::call_pure(d, args);
          for (std::size_t i = 0; i < s.targets.size(); ++i) {
            if (s.targets[i].slot >= 0) bind(f, s.targets[i].slot, outputs[i]);
          }
          advance(f);
          break;
        }
        tabling::IoActionRecord record = dispatch(d, args);
        Frame& top = stack_.back();
        for (std::size_t i = 0; i < s.targets.size(); ++i) {
          if (s.targets[i].slot >= 0) bind(top, s.targets[i].slot, record.outputs[i]);
        }
        advance(top);
        return IoEvent{std::move(record), top.depth};
      }
      case Stmt::Kind::if_: {
        Value cond = eval(s.value, f);
        const bool* b = cond.get_if<bool>();
        if (b == nullptr) throw Fault("if condition must be a bool, got " + render(cond));
        advance(f);
        if (*b) {
          f.cursor.push_back({&s.then_block, 0});
        } else if (s.has_else) {
          f.cursor.push_back({&s.else_block, 0});
        }
        break;
      }
      case Stmt::Kind::match: {
        Value v = eval(s.value, f);
        std::vector<std::pair<const Pattern*, Value>> binds;
        const lang::StmtArm* chosen = nullptr;
        for (const auto& arm : s.arms) {
          binds.clear();
          if (match(arm.pattern, v, binds)) {
            chosen = &arm;
            break;
          }
        }
        if (chosen == nullptr) throw Fault("no match arm for " + render(v));
        for (auto& [p, val] : binds) bind(f, p->slot, std::move(val));
        advance(f);
        f.cursor.push_back({&chosen->body, 0});
        break;
      }
      case Stmt::Kind::return_: {
        std::vector<Value> outputs;
        outputs.reserve(s.results.size());
        for (const Expr& e : s.results) outputs.push_back(eval(e, f));
        return finish_call(std::move(outputs));
      }
      }
    }
  } catch (const tabling::Divergence& d) {
    status_ = Status::error;
    error_ = d.what();
    return FaultEvent{d.what(), d};
  } catch (const Fault& e) {
    status_ = Status::error;
    error_ = e.what();
    return FaultEvent{e.what(), std::nullopt};
  } catch (const io::PrimitiveFault& e) {
    status_ = Status::error;
    error_ = e.what();
    return FaultEvent{e.what(), std::nullopt};
  }
}

bool Machine::match(const Pattern& p, const Value& v, std::vector<std::pair<const Pattern*, Value>>& out) {
  switch (p.kind) {
  case Pattern::Kind::wildcard: return true;
  case Pattern::Kind::bind: out.emplace_back(&p, v); return true;
  case Pattern::Kind::literal: return v == p.literal;
  case Pattern::Kind::constructor: {
    const auto* var = v.get_if<Variant>();
    if (var == nullptr || var->tag != p.name || var->payload.size() != p.args.size()) return false;
    for (std::size_t i = 0; i < p.args.size(); ++i) {
      if (!match(p.args[i], var->payload[i], out)) return false;
    }
    return true;
  }
  }
  return false;
}

Value Machine::eval(const Expr& e, const Frame& f) {
  switch (e.kind) {
  case Expr::Kind::literal: return e.literal;
  case Expr::Kind::var:
    if (e.storage == Storage::scoped) return scoped_.at(static_cast<std::size_t>(e.slot));
    if (const auto& cell = f.env.at(static_cast<std::size_t>(e.slot))) return *cell;
    throw Fault("internal: " + e.name + " read before binding");
  case Expr::Kind::unary: {
    Value v = eval(e.operands[0], f);
    if (e.unary_op == lang::UnaryOp::logical_not) {
      if (const bool* b = v.get_if<bool>()) return Value(!*b);
      throw Fault("'!' needs a bool, got " + render(v));
    }
    if (const auto* i = v.get_if<std::int64_t>()) {
      if (*i == std::numeric_limits<std::int64_t>::min()) throw Fault("arithmetic overflow");
      return Value(-*i);
    }
    throw Fault("'-' needs an int, got " + render(v));
  }
  case Expr::Kind::binary: return eval_binary(e, f);
  case Expr::Kind::construct: {
    Variant var{e.name, {}};
    var.payload.reserve(e.operands.size());
    for (const Expr& o : e.operands) var.payload.push_back(eval(o, f));
    return Value(std::move(var));
  }
  case Expr::Kind::match: {
    Value v = eval(e.operands[0], f);
    std::vector<std::pair<const Pattern*, Value>> binds;
    for (const auto& arm : e.arms) {
      binds.clear();
      if (!match(arm.pattern, v, binds)) continue;
      const std::size_t mark = scoped_.size();
      for (auto& [p, val] : binds) scoped_.push_back(std::move(val));
      Value result = eval(arm.body, f);
      scoped_.resize(mark);
      return result;
    }
    throw Fault("no match arm for " + render(v));
  }
  }
  throw Fault("internal: bad expression");
}

Value Machine::eval_binary(const Expr& e, const Frame& f) {
  const BinaryOp op = e.binary_op;
  if (op == BinaryOp::logical_and || op == BinaryOp::logical_or) {
    Value lhs = eval(e.operands[0], f);
    const bool* l = lhs.get_if<bool>();
    if (l == nullptr) throw Fault(std::string("'") + std::string(lang::op_symbol(op)) + "' needs bools, got " + render(lhs));
    if (op == BinaryOp::logical_and && !*l) return Value(false);
    if (op == BinaryOp::logical_or && *l) return Value(true);
    Value rhs = eval(e.operands[1], f);
    const bool* r = rhs.get_if<bool>();
    if (r == nullptr) throw Fault(std::string("'") + std::string(lang::op_symbol(op)) + "' needs bools, got " + render(rhs));
    return Value(*r);
  }

  Value lhs = eval(e.operands[0], f);
  Value rhs = eval(e.operands[1], f);
  auto type_error = [&]() -> Fault {
    return Fault(std::string("'") + std::string(lang::op_symbol(op)) + "' cannot combine " + render(lhs) +
                 " and " + render(rhs));
  };

  switch (op) {
  case BinaryOp::eq: return Value(lhs == rhs);
  case BinaryOp::ne: return Value(!(lhs == rhs));
  case BinaryOp::concat: {
    const auto* a = lhs.get_if<std::string>();
    const auto* b = rhs.get_if<std::string>();
    if (a == nullptr || b == nullptr) throw type_error();
    return Value(*a + *b);
  }
  case BinaryOp::lt:
  case BinaryOp::le:
  case BinaryOp::gt:
  case BinaryOp::ge: {
    int cmp = 0;
    if (lhs.is<std::int64_t>() && rhs.is<std::int64_t>()) {
      auto a = lhs.as<std::int64_t>(), b = rhs.as<std::int64_t>();
      cmp = a < b ? -1 : a > b ? 1 : 0;
    } else if (lhs.is<Char>() && rhs.is<Char>()) {
      auto a = lhs.as<Char>().code, b = rhs.as<Char>().code;
      cmp = a < b ? -1 : a > b ? 1 : 0;
    } else if (lhs.is<std::string>() && rhs.is<std::string>()) {
      cmp = lhs.as<std::string>().compare(rhs.as<std::string>());
    } else {
      throw type_error();
    }
    switch (op) {
    case BinaryOp::lt: return Value(cmp < 0);
    case BinaryOp::le: return Value(cmp <= 0);
    case BinaryOp::gt: return Value(cmp > 0);
    default: return Value(cmp >= 0);
    }
  }
  default: break;
  }

  const auto* a = lhs.get_if<std::int64_t>();
  const auto* b = rhs.get_if<std::int64_t>();
  if (a == nullptr || b == nullptr) throw type_error();
  std::int64_t r = 0;
  switch (op) {
  case BinaryOp::add:
    if (__builtin_add_overflow(*a, *b, &r)) throw Fault("arithmetic overflow");
    return Value(r);
  case BinaryOp::sub:
    if (__builtin_sub_overflow(*a, *b, &r)) throw Fault("arithmetic overflow");
    return Value(r);
  case BinaryOp::mul:
    if (__builtin_mul_overflow(*a, *b, &r)) throw Fault("arithmetic overflow");
    return Value(r);
  case BinaryOp::div:
  case BinaryOp::mod:
    if (*b == 0) throw Fault("division by zero");
    if (*a == std::numeric_limits<std::int64_t>::min() && *b == -1) throw Fault("arithmetic overflow");
    return Value(op == BinaryOp::div ? *a / *b : *a % *b);
  default: break;
  }
  throw type_error();
}

} // namespace tardi::vm
