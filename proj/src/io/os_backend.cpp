#include "tardi/io/os_backend.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace fs = std::filesystem;

namespace tardi::io {

OsBackend::OsBackend(fs::path root, std::istream& in, std::ostream& out)
    : root_(fs::weakly_canonical(fs::absolute(std::move(root)))), in_(in), out_(out) {}

std::optional<fs::path> OsBackend::resolve(const std::string& path) const {
  fs::path rel(path);
  if (path.empty() || rel.is_absolute() || rel.has_root_name()) return std::nullopt;
  fs::path full = fs::weakly_canonical(root_ / rel);
  auto [root_end, full_it] = std::mismatch(root_.begin(), root_.end(), full.begin(), full.end());
  if (root_end != root_.end()) return std::nullopt;
  return full;
}

OpenResult OsBackend::open(const std::string& path, const std::string& mode) {
  auto full = resolve(path);
  if (!full) return {Value::error("path escapes sandbox: " + path), Value(Unit{})};
  std::ios::openmode flags;
  bool readable = false;
  if (mode == "read") {
    flags = std::ios::in | std::ios::binary;
    readable = true;
  } else if (mode == "write") {
    flags = std::ios::out | std::ios::trunc | std::ios::binary;
  } else if (mode == "append") {
    flags = std::ios::out | std::ios::app | std::ios::binary;
  } else {
    return {Value::error("invalid mode " + mode), Value(Unit{})};
  }
  Stream stream;
  stream.file.open(*full, flags);
  if (!stream.file.is_open()) {
    return {Value::error((readable ? "no such file: " : "cannot open: ") + path), Value(Unit{})};
  }
  stream.readable = readable;
  std::int64_t id = next_handle_++;
  streams_.emplace(id, std::move(stream));
  return {Value::ok(), Value::handle(id)};
}

Value OsBackend::close(std::int64_t handle) {
  if (handle == stdin_handle || handle == stdout_handle) return Value::error("cannot close a standard stream");
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("close on closed stream");
  it->second.file.close();
  bool failed = it->second.file.fail();
  streams_.erase(it);
  return failed ? Value::error("close failed") : Value::ok();
}

Value OsBackend::read_char_from(std::istream& in) {
  int first = in.get();
  if (first == std::char_traits<char>::eof()) {
    in.clear();
    return Value::eof();
  }
  std::string bytes(1, static_cast<char>(first));
  auto lead = static_cast<unsigned char>(first);
  int extra = lead >= 0xF0 ? 3 : lead >= 0xE0 ? 2 : lead >= 0xC0 ? 1 : 0;
  for (int i = 0; i < extra; ++i) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) break;
    bytes.push_back(static_cast<char>(c));
  }
  std::size_t pos = 0;
  return Value::character(decode_utf8(bytes, pos));
}

Value OsBackend::read_line_from(std::istream& in) {
  if (in.peek() == std::char_traits<char>::eof()) {
    in.clear();
    return Value::eof();
  }
  std::string line;
  std::getline(in, line);
  if (in.bad()) return Value::error("read failed");
  in.clear();
  return Value(std::move(line));
}

Value OsBackend::read_char(std::int64_t handle) {
  if (handle == stdin_handle) return read_char_from(in_);
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("read on closed stream");
  if (!it->second.readable) return Value::error("stream not open for reading");
  return read_char_from(it->second.file);
}

Value OsBackend::read_line(std::int64_t handle) {
  if (handle == stdin_handle) return read_line_from(in_);
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("read on closed stream");
  if (!it->second.readable) return Value::error("stream not open for reading");
  return read_line_from(it->second.file);
}

Value OsBackend::write_string(std::int64_t handle, std::string_view text) {
  std::ostream* out = nullptr;
  if (handle == stdout_handle) {
    out = &out_;
  } else {
    auto it = streams_.find(handle);
    if (it == streams_.end()) return Value::error("write on closed stream");
    if (it->second.readable) return Value::error("stream not open for writing");
    out = &it->second.file;
  }
  out->write(text.data(), static_cast<std::streamsize>(text.size()));
  out->flush();
  return out->good() ? Value::ok() : Value::error("write failed");
}

} // namespace tardi::io
