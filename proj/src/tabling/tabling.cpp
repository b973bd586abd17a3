#include "tardi/tabling/tabling.hpp"

#include <algorithm>

namespace tardi::tabling {

SlotOccupied::SlotOccupied(ActionNumber n)
    : Error("answer slot " + std::to_string(n) + " already occupied"), number(n) {}

namespace {

std::string divergence_message(ActionNumber n, const std::string& rname, const std::vector<Value>& rin,
                               const std::string& aname, const std::vector<Value>& ain) {
  return "divergence at I/O action " + std::to_string(n) + ": recorded " + rname + render_list(rin) +
         ", attempted " + aname + render_list(ain);
}

} // namespace

Divergence::Divergence(ActionNumber n, std::string rname, std::vector<Value> rin, std::string aname,
                       std::vector<Value> ain)
    : Error(divergence_message(n, rname, rin, aname, ain)), number(n), recorded_name(std::move(rname)),
      recorded_inputs(std::move(rin)), attempted_name(std::move(aname)), attempted_inputs(std::move(ain)) {}

AnswerBlock::AnswerBlock(std::string name, std::vector<Value> inputs, std::size_t n_outputs)
    : name_(std::move(name)), inputs_(std::move(inputs)), outputs_(n_outputs) {}

void AnswerBlock::save_answer(std::size_t index, Value value) {
  if (index >= outputs_.size()) {
    throw IndexOutOfRange("answer index " + std::to_string(index) + " out of range for " + name_ +
                          " (" + std::to_string(outputs_.size()) + " outputs)");
  }
  outputs_[index] = std::move(value);
}

const Value& AnswerBlock::restore_answer(std::size_t index) const {
  if (index >= outputs_.size()) {
    throw IndexOutOfRange("answer index " + std::to_string(index) + " out of range for " + name_ +
                          " (" + std::to_string(outputs_.size()) + " outputs)");
  }
  if (!outputs_[index]) {
    throw RestoreUnset("answer " + std::to_string(index) + " of " + name_ + " was never saved");
  }
  return *outputs_[index];
}

IoActionTable::IoActionTable(std::size_t initial_capacity)
    : initial_capacity_(std::max<std::size_t>(initial_capacity, 1)), slots_(initial_capacity_) {}

const AnswerBlock* IoActionTable::find(ActionNumber n) const {
  return n < slots_.size() ? slots_[n].get() : nullptr;
}

AnswerBlock* IoActionTable::find(ActionNumber n) {
  return n < slots_.size() ? slots_[n].get() : nullptr;
}

AnswerBlock& IoActionTable::create(ActionNumber n, std::string name, std::vector<Value> inputs,
                                   std::size_t n_outputs) {
  if (n < slots_.size() && slots_[n]) throw SlotOccupied(n);
  std::size_t capacity = slots_.size();
  while (n >= capacity) capacity *= 2;
  if (capacity != slots_.size()) slots_.resize(capacity);
  slots_[n] = std::make_unique<AnswerBlock>(std::move(name), std::move(inputs), n_outputs);
  ++occupied_;
  return *slots_[n];
}

std::size_t IoActionTable::stored_value_count() const {
  std::size_t total = 0;
  for_each([&](ActionNumber, const AnswerBlock& b) { total += b.stored_values(); });
  return total;
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
  case Mode::off: return "off";
  case Mode::full: return "full";
  case Mode::manual: return "manual";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "off") return Mode::off;
  if (text == "full") return Mode::full;
  if (text == "manual") return Mode::manual;
  return std::nullopt;
}

TablingState::TablingState(Mode mode, std::size_t initial_capacity)
    : mode_(mode), table_(initial_capacity) {
  set_mode(mode);
}

ActionNumber TablingState::allocate_action_number() {
  started_ = true;
  ActionNumber n = counter_++;
  high_water_ = std::max(high_water_, counter_);
  return n;
}

AnswerBlock& TablingState::create_answer_block(ActionNumber n, std::string name, std::vector<Value> inputs,
                                               std::size_t n_outputs) {
  return table_.create(n, std::move(name), std::move(inputs), n_outputs);
}

void TablingState::reset_counter(ActionNumber target) {
  if (target > counter_) {
    throw TargetInFuture("cannot reset I/O action counter forward from " + std::to_string(counter_) +
                         " to " + std::to_string(target));
  }
  counter_ = target;
}

void TablingState::set_mode(Mode mode) {
  if (started_) throw ModeViolation("tabling mode can only be chosen before execution starts");
  mode_ = mode;
  enabled_ = mode == Mode::full;
  region_.reset();
  if (mode == Mode::full) region_ = Region{0, std::nullopt};
}

void TablingState::start_tabling() {
  if (mode_ != Mode::manual) throw ModeViolation("table start requires manual mode");
  if (enabled_) throw ModeViolation("I/O tabling is already on");
  region_ = Region{counter_, std::nullopt};
  enabled_ = true;
}

void TablingState::stop_tabling() {
  if (mode_ != Mode::manual) throw ModeViolation("table stop requires manual mode");
  if (!enabled_) throw ModeViolation("I/O tabling is not on");
  region_->end = std::max(counter_, region_->start);
  enabled_ = false;
}

bool TablingState::region_contains(ActionNumber a, ActionNumber b) const {
  if (a >= b) return true;
  return region_ && a >= region_->start && (!region_->end || b <= *region_->end);
}

ActionNumber TablingState::count_untabled(ActionNumber a, ActionNumber b) const {
  if (a >= b) return 0;
  if (!region_) return b - a;
  ActionNumber lo = std::max(a, region_->start);
  ActionNumber hi = region_->end ? std::min(b, *region_->end) : b;
  ActionNumber inside = hi > lo ? hi - lo : 0;
  return (b - a) - inside;
}

IoActionRecord idempotent_execute(TablingState& state, io::World& world, const PrimitiveDescriptor& d,
                                  std::span<const Value> inputs) {
  const ActionNumber n = state.allocate_action_number();
  const bool tabled = state.tabled(n);
  if (tabled) {
    if (AnswerBlock* block = state.table().find(n)) {
      if (block->name() != d.name || !std::equal(inputs.begin(), inputs.end(), block->inputs().begin(),
                                                 block->inputs().end())) {
        throw Divergence(n, block->name(), block->inputs(), d.name,
                         std::vector<Value>(inputs.begin(), inputs.end()));
      }
      IoActionRecord record{n, d.name, block->inputs(), {}, true, true};
      record.outputs.reserve(block->n_outputs());
      for (std::size_t i = 0; i < block->n_outputs(); ++i) record.outputs.push_back(block->restore_answer(i));
      block->note_replay();
      return record;
    }
  }

  std::vector<Value> outputs = world.perform(d, inputs, n);
  if (tabled) {
    AnswerBlock& block = state.create_answer_block(n, d.name, std::vector<Value>(inputs.begin(), inputs.end()),
                                                   static_cast<std::size_t>(d.n_outputs));
    for (std::size_t i = 0; i < outputs.size(); ++i) block.save_answer(i, outputs[i]);
  }
  return IoActionRecord{n, d.name, std::vector<Value>(inputs.begin(), inputs.end()), std::move(outputs), false,
                        tabled};
}

std::string dump_table(const TablingState& state) {
  std::string out;
  state.table().for_each([&](ActionNumber n, const AnswerBlock& b) {
    std::vector<Value> outputs;
    for (std::size_t i = 0; i < b.n_outputs(); ++i) {
      outputs.push_back(b.output_set(i) ? b.restore_answer(i) : Value(Unit{}));
    }
    out += std::to_string(n) + "\t" + b.name() + "\t" + render_list(b.inputs()) + "\t" +
           render_list(outputs) + "\t" + std::to_string(b.replay_count()) + "\n";
  });
  return out;
}

} // namespace tardi::tabling
