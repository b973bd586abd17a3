#pragma once

#include "tardi/io/world.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <optional>

namespace tardi::io {

/// Host file system access confined to a sandbox root. Handle 0 reads from
/// `in`, handle 1 writes to `out`.
class OsBackend final : public IoBackend {
public:
  OsBackend(std::filesystem::path root, std::istream& in, std::ostream& out);

  OpenResult open(const std::string& path, const std::string& mode) override;
  Value close(std::int64_t handle) override;
  Value read_char(std::int64_t handle) override;
  Value read_line(std::int64_t handle) override;
  Value write_string(std::int64_t handle, std::string_view text) override;
  std::size_t open_handle_count() const override { return streams_.size(); }

  /// Resolves `path` under the root; empty if it would escape the sandbox.
  std::optional<std::filesystem::path> resolve(const std::string& path) const;

private:
  struct Stream {
    std::fstream file;
    bool readable = false;
  };

  Value read_char_from(std::istream& in);
  Value read_line_from(std::istream& in);

  std::filesystem::path root_;
  std::istream& in_;
  std::ostream& out_;
  std::map<std::int64_t, Stream> streams_;
  std::int64_t next_handle_ = 2;
};

} // namespace tardi::io
