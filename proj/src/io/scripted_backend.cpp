#include "tardi/io/scripted_backend.hpp"

#include "tardi/lang/lexer.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tardi::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Decodes a quoted string using the language's string-literal rules.
std::string unquote(std::string_view text, int line) {
  std::vector<lang::Token> tokens;
  try {
    tokens = lang::tokenize(text);
  } catch (const lang::LexError& e) {
    throw ConfigError("script line " + std::to_string(line) + ": " + e.message);
  }
  if (tokens.size() != 1 || tokens[0].kind != lang::TokenKind::string_lit) {
    throw ConfigError("script line " + std::to_string(line) + ": expected a quoted string");
  }
  return tokens[0].text;
}

} // namespace

ScriptConfig parse_script_config(std::string_view text) {
  ScriptConfig config;
  std::string* section = nullptr; // raw file section being filled
  bool pending_stdin = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    std::string_view line = trim(raw);

    if (pending_stdin) {
      config.stdin_text = unquote(line, line_no);
      pending_stdin = false;
      continue;
    }
    if (line.rfind("stdin:", 0) == 0) {
      section = nullptr;
      std::string_view rest = trim(line.substr(6));
      if (rest.empty()) {
        pending_stdin = true;
      } else {
        config.stdin_text = unquote(rest, line_no);
      }
      continue;
    }
    if (line.rfind("fail ", 0) == 0) {
      std::string_view rest = line.substr(5);
      std::size_t colon = rest.find(':');
      if (colon == std::string_view::npos) {
        throw ConfigError("script line " + std::to_string(line_no) + ": expected `fail N: \"message\"`");
      }
      std::string_view num = trim(rest.substr(0, colon));
      std::uint64_t index = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), index);
      if (ec != std::errc() || ptr != num.data() + num.size()) {
        throw ConfigError("script line " + std::to_string(line_no) + ": bad operation index");
      }
      config.failures[index] = unquote(trim(rest.substr(colon + 1)), line_no);
      section = nullptr;
      continue;
    }
    if (line.rfind("file ", 0) == 0 && line.size() > 6 && line.back() == ':' ) {
      std::string path(trim(line.substr(5, line.size() - 6)));
      section = &config.files[path];
      section->clear();
      continue;
    }
    if (line.rfind("file ", 0) == 0) {
      // Inline form: file <path>: "content"
      std::size_t colon = line.find(": \"");
      if (colon != std::string_view::npos) {
        std::string path(trim(line.substr(5, colon - 5)));
        config.files[path] = unquote(line.substr(colon + 2), line_no);
        section = nullptr;
        continue;
      }
    }
    if (section != nullptr) {
      section->append(raw);
      section->push_back('\n');
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    throw ConfigError("script line " + std::to_string(line_no) + ": unexpected text outside a section");
  }
  if (pending_stdin) throw ConfigError("script: `stdin:` without a quoted string");
  return config;
}

ScriptConfig load_script_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script_config(buf.str());
}

ScriptedBackend::ScriptedBackend(ScriptConfig config) : config_(std::move(config)) {}

const std::string* ScriptedBackend::file(const std::string& path) const {
  auto it = config_.files.find(path);
  return it == config_.files.end() ? nullptr : &it->second;
}

const std::string* ScriptedBackend::next_operation() {
  auto it = config_.failures.find(operations_++);
  return it == config_.failures.end() ? nullptr : &it->second;
}

OpenResult ScriptedBackend::open(const std::string& path, const std::string& mode_name) {
  if (const std::string* forced = next_operation()) return {Value::error(*forced), Value(Unit{})};
  Mode mode;
  if (mode_name == "read") mode = Mode::read;
  else if (mode_name == "write") mode = Mode::write;
  else if (mode_name == "append") mode = Mode::append;
  else return {Value::error("invalid mode " + mode_name), Value(Unit{})};

  auto it = config_.files.find(path);
  if (mode == Mode::read && it == config_.files.end()) {
    return {Value::error("no such file: " + path), Value(Unit{})};
  }
  if (mode == Mode::write) config_.files[path].clear();
  if (mode == Mode::append) config_.files.try_emplace(path);

  std::int64_t id = next_handle_++;
  streams_.emplace(id, Stream{path, mode, 0});
  ++opens_;
  return {Value::ok(), Value::handle(id)};
}

Value ScriptedBackend::close(std::int64_t handle) {
  if (const std::string* forced = next_operation()) return Value::error(*forced);
  if (handle == stdin_handle || handle == stdout_handle) return Value::error("cannot close a standard stream");
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("close on closed stream");
  streams_.erase(it);
  ++closes_;
  return Value::ok();
}

Value ScriptedBackend::read_char_from(const std::string& text, std::size_t& cursor) {
  if (cursor >= text.size()) return Value::eof();
  return Value::character(decode_utf8(text, cursor));
}

Value ScriptedBackend::read_line_from(const std::string& text, std::size_t& cursor) {
  if (cursor >= text.size()) return Value::eof();
  std::size_t eol = text.find('\n', cursor);
  std::string line;
  if (eol == std::string::npos) {
    line = text.substr(cursor);
    cursor = text.size();
  } else {
    line = text.substr(cursor, eol - cursor);
    cursor = eol + 1;
  }
  return Value(std::move(line));
}

Value ScriptedBackend::read_char(std::int64_t handle) {
  if (const std::string* forced = next_operation()) return Value::error(*forced);
  if (handle == stdin_handle) return read_char_from(config_.stdin_text, stdin_cursor_);
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("read on closed stream");
  if (it->second.mode != Mode::read) return Value::error("stream not open for reading");
  return read_char_from(config_.files[it->second.path], it->second.cursor);
}

Value ScriptedBackend::read_line(std::int64_t handle) {
  if (const std::string* forced = next_operation()) return Value::error(*forced);
  if (handle == stdin_handle) return read_line_from(config_.stdin_text, stdin_cursor_);
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("read on closed stream");
  if (it->second.mode != Mode::read) return Value::error("stream not open for reading");
  return read_line_from(config_.files[it->second.path], it->second.cursor);
}

Value ScriptedBackend::write_string(std::int64_t handle, std::string_view text) {
  if (const std::string* forced = next_operation()) return Value::error(*forced);
  if (handle == stdout_handle) {
    stdout_.append(text);
    return Value::ok();
  }
  auto it = streams_.find(handle);
  if (it == streams_.end()) return Value::error("write on closed stream");
  if (it->second.mode == Mode::read) return Value::error("stream not open for writing");
  config_.files[it->second.path].append(text);
  return Value::ok();
}

} // namespace tardi::io
