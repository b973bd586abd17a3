#include "tardi/lang/checker.hpp"
#include "tardi/lang/parser.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

namespace tardi::lang {

namespace {

std::string join_errors(const std::vector<CheckError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "\n";
    out += std::to_string(e.span.line) + ":" + std::to_string(e.span.col) + ": " + e.message;
  }
  return out;
}

std::string plural(std::size_t n, std::string_view word) {
  return std::to_string(n) + " " + std::string(word) + (n == 1 ? "" : "s");
}

// Binding state along the control paths reaching a program point.
// `maybe`: bound on at least one path. `definite`: bound on every path.
struct Flow {
  std::set<std::string> maybe;
  std::set<std::string> definite;
  bool returned = false;
};

Flow merge(const std::vector<Flow>& branches) {
  Flow out;
  bool first = true;
  for (const Flow& f : branches) {
    if (f.returned) continue;
    out.maybe.insert(f.maybe.begin(), f.maybe.end());
    if (first) {
      out.definite = f.definite;
      first = false;
    } else {
      std::set<std::string> both;
      std::set_intersection(out.definite.begin(), out.definite.end(), f.definite.begin(),
                            f.definite.end(), std::inserter(both, both.begin()));
      out.definite = std::move(both);
    }
  }
  out.returned = first;
  return out;
}

class Checker {
public:
  Checker(Program& program, std::span<const PrimitiveDescriptor> primitives)
      : program_(program), primitives_(primitives) {}

  std::vector<CheckError> run() {
    index_procedures();
    for (auto& proc : program_.procedures) check_procedure(proc);
    return std::move(errors_);
  }

  int entry() const { return entry_; }

private:
  Program& program_;
  std::span<const PrimitiveDescriptor> primitives_;
  std::vector<CheckError> errors_;
  std::unordered_map<std::string, int> procs_;
  std::unordered_map<std::string, int> prims_;
  int entry_ = -1;

  // Per-procedure state.
  Procedure* proc_ = nullptr;
  std::map<std::string, int> slots_;
  std::vector<std::string> scoped_; // names bound by enclosing match expressions

  void error(Span span, std::string message) { errors_.push_back({span, std::move(message)}); }

  static void collect_return_arities(const Block& block, std::vector<std::size_t>& out) {
    for (const Stmt& s : block) {
      switch (s.kind) {
      case Stmt::Kind::return_: out.push_back(s.results.size()); break;
      case Stmt::Kind::if_:
        collect_return_arities(s.then_block, out);
        collect_return_arities(s.else_block, out);
        break;
      case Stmt::Kind::match:
        for (const auto& arm : s.arms) collect_return_arities(arm.body, out);
        break;
      default: break;
      }
    }
  }

  void index_procedures() {
    for (std::size_t i = 0; i < primitives_.size(); ++i) prims_[primitives_[i].name] = static_cast<int>(i);
    for (std::size_t i = 0; i < program_.procedures.size(); ++i) {
      Procedure& proc = program_.procedures[i];
      if (procs_.count(proc.name) != 0) {
        error(proc.span, "duplicate procedure " + proc.name);
        continue;
      }
      if (prims_.count(proc.name) != 0) error(proc.span, proc.name + " shadows a primitive");
      if (is_reserved_name(proc.name)) error(proc.span, proc.name + " is a reserved name");
      procs_[proc.name] = static_cast<int>(i);
      std::vector<std::size_t> arities;
      collect_return_arities(proc.body, arities);
      proc.n_outputs = arities.empty() ? 0 : static_cast<int>(arities.front());
    }
    auto it = procs_.find(program_.entry);
    if (it == procs_.end()) {
      error({1, 1}, "missing entry procedure " + program_.entry);
    } else {
      entry_ = it->second;
      const Procedure& main = program_.procedures[static_cast<std::size_t>(entry_)];
      if (!main.params.empty()) error(main.span, program_.entry + " must take no parameters");
    }
  }

  int slot_for(const std::string& name) {
    auto [it, inserted] = slots_.try_emplace(name, static_cast<int>(proc_->slot_names.size()));
    if (inserted) proc_->slot_names.push_back(name);
    return it->second;
  }

  bool bind(const std::string& name, Span span, Flow& flow) {
    if (is_reserved_name(name)) {
      error(span, name + " is a reserved name");
      return false;
    }
    if (flow.maybe.count(name) != 0 ||
        std::find(scoped_.begin(), scoped_.end(), name) != scoped_.end()) {
      error(span, name + " rebound");
      return false;
    }
    flow.maybe.insert(name);
    flow.definite.insert(name);
    return true;
  }

  void check_procedure(Procedure& proc) {
    proc_ = &proc;
    slots_.clear();
    scoped_.clear();
    proc.slot_names.clear();

    Flow flow;
    for (const auto& param : proc.params) {
      if (bind(param, proc.span, flow)) slot_for(param);
    }
    check_block(proc.body, flow);
    if (!flow.returned && proc.n_outputs > 0) {
      error(proc.end_span, "missing return in " + proc.name + " (expects " +
                               plural(static_cast<std::size_t>(proc.n_outputs), "value") + ")");
    }
  }

  void check_block(Block& block, Flow& flow) {
    for (Stmt& s : block) {
      if (flow.returned) {
        error(s.span, "unreachable statement");
        return;
      }
      check_stmt(s, flow);
    }
  }

  void check_stmt(Stmt& s, Flow& flow) {
    switch (s.kind) {
    case Stmt::Kind::let:
      check_expr(s.value, flow);
      if (bind(s.targets[0].name, s.targets[0].span, flow)) s.targets[0].slot = slot_for(s.targets[0].name);
      break;
    case Stmt::Kind::call: check_call(s, flow); break;
    case Stmt::Kind::if_: {
      check_expr(s.value, flow);
      Flow then_flow = flow;
      Flow else_flow = flow;
      check_block(s.then_block, then_flow);
      check_block(s.else_block, else_flow);
      flow = merge({then_flow, else_flow});
      break;
    }
    case Stmt::Kind::match: {
      check_expr(s.value, flow);
      std::vector<Flow> arms;
      for (StmtArm& arm : s.arms) {
        Flow arm_flow = flow;
        check_pattern(arm.pattern);
        bind_pattern_frame(arm.pattern, arm_flow);
        check_block(arm.body, arm_flow);
        arms.push_back(std::move(arm_flow));
      }
      flow = merge(arms);
      break;
    }
    case Stmt::Kind::return_: {
      for (Expr& e : s.results) check_expr(e, flow);
      if (static_cast<int>(s.results.size()) != proc_->n_outputs) {
        error(s.span, "inconsistent return arity in " + proc_->name + ": expected " +
                          plural(static_cast<std::size_t>(proc_->n_outputs), "value") + ", got " +
                          std::to_string(s.results.size()));
      }
      flow.returned = true;
      break;
    }
    }
  }

  void check_call(Stmt& s, Flow& flow) {
    for (Expr& a : s.args) check_expr(a, flow);
    std::size_t n_inputs = 0;
    std::size_t n_outputs = 0;
    if (auto it = procs_.find(s.callee); it != procs_.end()) {
      s.callee_kind = CalleeKind::user;
      s.callee_index = it->second;
      const Procedure& callee = program_.procedures[static_cast<std::size_t>(it->second)];
      n_inputs = callee.params.size();
      n_outputs = static_cast<std::size_t>(callee.n_outputs);
    } else if (auto pit = prims_.find(s.callee); pit != prims_.end()) {
      s.callee_kind = CalleeKind::primitive;
      s.callee_index = pit->second;
      const PrimitiveDescriptor& d = primitives_[static_cast<std::size_t>(pit->second)];
      n_inputs = static_cast<std::size_t>(d.n_inputs);
      n_outputs = static_cast<std::size_t>(d.n_outputs);
    } else {
      error(s.callee_span, "unknown callee " + s.callee);
      return;
    }
    if (s.args.size() != n_inputs) {
      error(s.callee_span, "arity mismatch: " + s.callee + " expects " + plural(n_inputs, "argument") +
                               ", got " + std::to_string(s.args.size()));
    }
    if (!s.targets.empty() && s.targets.size() != n_outputs) {
      error(s.callee_span, "arity mismatch: " + s.callee + " returns " + plural(n_outputs, "value") +
                               ", bound to " + std::to_string(s.targets.size()));
    }
    for (Target& t : s.targets) {
      if (t.name == "_") continue;
      if (bind(t.name, t.span, flow)) t.slot = slot_for(t.name);
    }
  }

  void check_constructor_arity(std::string_view tag, std::size_t n, Span span) {
    bool ok = (tag == "no" && n == 0) || (tag == "yes" && n == 1) || (tag == "error" && n == 1) ||
              (tag == "ok" && n <= 1);
    if (!ok) error(span, "constructor " + std::string(tag) + " cannot take " + plural(n, "argument"));
  }

  void check_pattern(const Pattern& p) {
    if (p.kind == Pattern::Kind::constructor) {
      check_constructor_arity(p.name, p.args.size(), p.span);
      for (const auto& a : p.args) check_pattern(a);
    }
  }

  void bind_pattern_frame(Pattern& p, Flow& flow) {
    if (p.kind == Pattern::Kind::bind) {
      if (bind(p.name, p.span, flow)) {
        p.storage = Storage::frame;
        p.slot = slot_for(p.name);
      }
    }
    for (auto& a : p.args) bind_pattern_frame(a, flow);
  }

  void bind_pattern_scoped(Pattern& p, const Flow& flow, std::size_t& pushed) {
    if (p.kind == Pattern::Kind::bind) {
      if (is_reserved_name(p.name)) {
        error(p.span, p.name + " is a reserved name");
      } else if (flow.maybe.count(p.name) != 0 ||
                 std::find(scoped_.begin(), scoped_.end(), p.name) != scoped_.end()) {
        error(p.span, p.name + " rebound");
      }
      p.storage = Storage::scoped;
      p.slot = static_cast<int>(scoped_.size());
      scoped_.push_back(p.name);
      ++pushed;
    }
    for (auto& a : p.args) bind_pattern_scoped(a, flow, pushed);
  }

  void check_expr(Expr& e, const Flow& flow) {
    switch (e.kind) {
    case Expr::Kind::literal: break;
    case Expr::Kind::var: {
      auto sit = std::find(scoped_.rbegin(), scoped_.rend(), e.name);
      if (sit != scoped_.rend()) {
        e.storage = Storage::scoped;
        e.slot = static_cast<int>(std::distance(scoped_.begin(), sit.base()) - 1);
      } else if (flow.definite.count(e.name) != 0) {
        e.storage = Storage::frame;
        e.slot = slots_.at(e.name);
      } else if (flow.maybe.count(e.name) != 0) {
        error(e.span, e.name + " unbound on some paths");
      } else {
        error(e.span, e.name + " unbound");
      }
      break;
    }
    case Expr::Kind::unary:
    case Expr::Kind::binary:
      for (Expr& o : e.operands) check_expr(o, flow);
      break;
    case Expr::Kind::construct:
      check_constructor_arity(e.name, e.operands.size(), e.span);
      for (Expr& o : e.operands) check_expr(o, flow);
      break;
    case Expr::Kind::match:
      check_expr(e.operands[0], flow);
      for (ExprArm& arm : e.arms) {
        check_pattern(arm.pattern);
        std::size_t pushed = 0;
        bind_pattern_scoped(arm.pattern, flow, pushed);
        check_expr(arm.body, flow);
        scoped_.resize(scoped_.size() - pushed);
      }
      break;
    }
  }
};

} // namespace

CheckErrors::CheckErrors(std::vector<CheckError> errors_)
    : Error(join_errors(errors_)), errors(std::move(errors_)) {}

int CheckedProgram::find_procedure(std::string_view name) const {
  for (std::size_t i = 0; i < program.procedures.size(); ++i) {
    if (program.procedures[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

CheckedProgram check_program(Program program, std::span<const PrimitiveDescriptor> primitives) {
  Checker checker(program, primitives);
  auto errors = checker.run();
  if (!errors.empty()) throw CheckErrors(std::move(errors));
  CheckedProgram out;
  out.entry = checker.entry();
  out.program = std::move(program);
  out.primitives.assign(primitives.begin(), primitives.end());
  return out;
}

std::shared_ptr<const CheckedProgram> compile(std::string_view source,
                                              std::span<const PrimitiveDescriptor> primitives) {
  return std::make_shared<const CheckedProgram>(check_program(parse_source(source), primitives));
}

} // namespace tardi::lang
