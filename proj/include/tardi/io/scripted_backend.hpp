#pragma once

#include "tardi/io/world.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace tardi::io {

/// Contents of a script file:
///
///     stdin: "first line\nsecond line\n"
///     fail 3: "disk full"
///     file in.txt:
///     raw content line 1
///     raw content line 2
///
/// `fail N` forces the N-th backend operation (0-based) to return error(message).
struct ScriptConfig {
  std::string stdin_text;
  std::map<std::string, std::string> files;
  std::map<std::uint64_t, std::string> failures;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

ScriptConfig parse_script_config(std::string_view text);
ScriptConfig load_script_config(const std::filesystem::path& path);

/// In-memory world for deterministic runs. Handle ids are never reused.
class ScriptedBackend final : public IoBackend {
public:
  explicit ScriptedBackend(ScriptConfig config);

  OpenResult open(const std::string& path, const std::string& mode) override;
  Value close(std::int64_t handle) override;
  Value read_char(std::int64_t handle) override;
  Value read_line(std::int64_t handle) override;
  Value write_string(std::int64_t handle, std::string_view text) override;
  std::size_t open_handle_count() const override { return streams_.size(); }

  const std::string& stdout_text() const { return stdout_; }
  std::size_t stdin_cursor() const { return stdin_cursor_; }
  std::uint64_t operation_count() const { return operations_; }
  std::uint64_t opens() const { return opens_; }
  std::uint64_t successful_closes() const { return closes_; }
  /// Current content of a file, or nullptr if it does not exist.
  const std::string* file(const std::string& path) const;

private:
  enum class Mode { read, write, append };
  struct Stream {
    std::string path;
    Mode mode;
    std::size_t cursor = 0;
  };

  // Returns the injected failure message for the operation about to run, if any.
  const std::string* next_operation();
  Value read_char_from(const std::string& text, std::size_t& cursor);
  Value read_line_from(const std::string& text, std::size_t& cursor);

  ScriptConfig config_;
  std::string stdout_;
  std::size_t stdin_cursor_ = 0;
  std::map<std::int64_t, Stream> streams_;
  std::int64_t next_handle_ = 2;
  std::uint64_t operations_ = 0;
  std::uint64_t opens_ = 0;
  std::uint64_t closes_ = 0;
};

} // namespace tardi::io
