#pragma once

#include "tardi/primitive.hpp"
#include "tardi/value.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tardi::io {

/// Built-in primitives: the effectful stream operations plus pure string helpers.
std::span<const PrimitiveDescriptor> registry();
const PrimitiveDescriptor* find_primitive(std::string_view name);

inline constexpr std::int64_t stdin_handle = 0;
inline constexpr std::int64_t stdout_handle = 1;

struct OpenResult {
  Value code;   // ok | error(message)
  Value handle; // handle(id) on success, () otherwise
};

/// The outside world as seen by programs. Failures come back as error(...)
/// values; closing an unknown or already-closed handle is always an error.
class IoBackend {
public:
  virtual ~IoBackend() = default;

  virtual OpenResult open(const std::string& path, const std::string& mode) = 0;
  virtual Value close(std::int64_t handle) = 0;
  virtual Value read_char(std::int64_t handle) = 0;
  virtual Value read_line(std::int64_t handle) = 0;
  virtual Value write_string(std::int64_t handle, std::string_view text) = 0;

  /// Streams opened by open() and not yet closed.
  virtual std::size_t open_handle_count() const = 0;
};

struct TraceRecord {
  std::uint64_t seq = 0;
  ActionNumber action_number = 0;
  std::string name;
  std::vector<Value> inputs;
  std::vector<Value> outputs;
};

/// Append-only log of real backend invocations.
class EffectsTrace {
public:
  void append(ActionNumber action_number, std::string name, std::vector<Value> inputs,
              std::vector<Value> outputs);
  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

private:
  std::vector<TraceRecord> records_;
};

/// One record per line: seq, action number, name, inputs, outputs (tab separated).
std::string dump_trace(const EffectsTrace& trace);

/// Raised when a primitive receives a value of the wrong kind. This is a
/// program bug, so it faults the machine instead of returning error(...).
class PrimitiveFault : public Error {
public:
  using Error::Error;
};

class World {
public:
  explicit World(std::unique_ptr<IoBackend> backend);

  /// Runs a primitive for real. Effectful primitives hit the backend and are
  /// appended to the trace under `action_number`; pure ones touch neither.
  std::vector<Value> perform(const PrimitiveDescriptor& descriptor, std::span<const Value> inputs,
                             ActionNumber action_number);

  IoBackend& backend() { return *backend_; }
  const IoBackend& backend() const { return *backend_; }
  const EffectsTrace& trace() const { return trace_; }

private:
  std::unique_ptr<IoBackend> backend_;
  EffectsTrace trace_;
};

/// Evaluates a pure (effectful = false) primitive.
std::vector<Value> call_pure(const PrimitiveDescriptor& descriptor, std::span<const Value> inputs);

} // namespace tardi::io
