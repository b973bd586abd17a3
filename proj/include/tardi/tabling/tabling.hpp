#pragma once

#include "tardi/io/world.hpp"
#include "tardi/primitive.hpp"
#include "tardi/value.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tardi::tabling {

class SlotOccupied : public Error {
public:
  explicit SlotOccupied(ActionNumber n);
  ActionNumber number;
};

class IndexOutOfRange : public Error {
public:
  using Error::Error;
};

class RestoreUnset : public Error {
public:
  using Error::Error;
};

class TargetInFuture : public Error {
public:
  using Error::Error;
};

class ModeViolation : public Error {
public:
  using Error::Error;
};

/// Execution after a retry attempted a different action than the one recorded
/// under the same number.
class Divergence : public Error {
public:
  Divergence(ActionNumber n, std::string recorded_name, std::vector<Value> recorded_inputs,
             std::string attempted_name, std::vector<Value> attempted_inputs);
  ActionNumber number;
  std::string recorded_name;
  std::vector<Value> recorded_inputs;
  std::string attempted_name;
  std::vector<Value> attempted_inputs;
};

/// Recorded identity, inputs and outputs of one I/O action.
class AnswerBlock {
public:
  AnswerBlock(std::string name, std::vector<Value> inputs, std::size_t n_outputs);

  void save_answer(std::size_t index, Value value);
  const Value& restore_answer(std::size_t index) const;

  const std::string& name() const { return name_; }
  const std::vector<Value>& inputs() const { return inputs_; }
  std::size_t n_outputs() const { return outputs_.size(); }
  bool output_set(std::size_t index) const { return outputs_.at(index).has_value(); }
  std::uint64_t replay_count() const { return replay_count_; }
  void note_replay() { ++replay_count_; }

  /// Values held by this block: inputs, outputs and the primitive identity.
  std::size_t stored_values() const { return inputs_.size() + outputs_.size() + 1; }

private:
  std::string name_;
  std::vector<Value> inputs_;
  std::vector<std::optional<Value>> outputs_;
  std::uint64_t replay_count_ = 0;
};

/// Dense array from action number to answer block, doubled whenever a number
/// falls past the end. Empty slots hold null.
class IoActionTable {
public:
  static constexpr std::size_t default_initial_capacity = 64;

  explicit IoActionTable(std::size_t initial_capacity = default_initial_capacity);

  const AnswerBlock* find(ActionNumber n) const;
  AnswerBlock* find(ActionNumber n);
  /// Grows until n fits, then installs a fresh block. Throws SlotOccupied.
  AnswerBlock& create(ActionNumber n, std::string name, std::vector<Value> inputs, std::size_t n_outputs);

  std::size_t capacity() const { return slots_.size(); }
  std::size_t initial_capacity() const { return initial_capacity_; }
  std::size_t occupied() const { return occupied_; }
  std::size_t stored_value_count() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i]) fn(static_cast<ActionNumber>(i), *slots_[i]);
    }
  }

private:
  std::size_t initial_capacity_;
  std::vector<std::unique_ptr<AnswerBlock>> slots_;
  std::size_t occupied_ = 0;
};

enum class Mode { off, full, manual };

std::string_view mode_name(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

/// Half-open interval of action numbers recorded while tabling was on.
struct Region {
  ActionNumber start = 0;
  std::optional<ActionNumber> end; // nullopt: still open
  bool contains(ActionNumber n) const { return n >= start && (!end || n < *end); }
};

class TablingState {
public:
  explicit TablingState(Mode mode = Mode::full,
                        std::size_t initial_capacity = IoActionTable::default_initial_capacity);

  /// Returns the counter and advances it. Counts in every mode.
  ActionNumber allocate_action_number();
  ActionNumber counter() const { return counter_; }
  ActionNumber high_water() const { return high_water_; }

  const AnswerBlock* io_has_occurred(ActionNumber n) const { return table_.find(n); }
  AnswerBlock& create_answer_block(ActionNumber n, std::string name, std::vector<Value> inputs,
                                   std::size_t n_outputs);

  /// Rewinds the counter to `target` (the entry snapshot of a retried frame).
  void reset_counter(ActionNumber target);

  void set_mode(Mode mode);
  void start_tabling();
  void stop_tabling();
  Mode mode() const { return mode_; }
  bool enabled() const { return enabled_; }
  const std::optional<Region>& region() const { return region_; }

  /// True iff tabling applies to action n.
  bool tabled(ActionNumber n) const { return region_ && region_->contains(n); }
  /// True iff every number in [a, b) lies in the recorded region.
  bool region_contains(ActionNumber a, ActionNumber b) const;
  /// Numbers in [a, b) outside the recorded region.
  ActionNumber count_untabled(ActionNumber a, ActionNumber b) const;

  const IoActionTable& table() const { return table_; }
  IoActionTable& table() { return table_; }

private:
  ActionNumber counter_ = 0;
  ActionNumber high_water_ = 0;
  Mode mode_;
  bool enabled_ = false;
  bool started_ = false;
  std::optional<Region> region_;
  IoActionTable table_;
};

/// What one trip through the idempotent wrapper produced.
struct IoActionRecord {
  ActionNumber number = 0;
  std::string name;
  std::vector<Value> inputs;
  std::vector<Value> outputs;
  bool replayed = false;
  bool tabled = false;
};

/// Allocates an action number; replays the recorded outputs if that number
/// was already executed inside the tabled region, otherwise performs the
/// action against the world and records it when tabling applies.
/// Throws Divergence if the replayed slot holds a different primitive or inputs.
IoActionRecord idempotent_execute(TablingState& state, io::World& world,
                                  const PrimitiveDescriptor& descriptor, std::span<const Value> inputs);

/// One line per occupied slot: number, name, inputs, outputs, replay count.
std::string dump_table(const TablingState& state);

} // namespace tardi::tabling
