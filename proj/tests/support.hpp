#pragma once

#include "tardi/io/scripted_backend.hpp"
#include "tardi/io/world.hpp"
#include "tardi/lang/checker.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

namespace tardi::testing {

inline std::filesystem::path programs_dir() { return TARDI_PROGRAMS_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string program_source(const std::string& name) { return read_file(programs_dir() / (name + ".tardi")); }

inline std::shared_ptr<const lang::CheckedProgram> load_program(const std::string& name) {
  return lang::compile(program_source(name), io::registry());
}

// The program's .script file, or an empty world.
inline io::ScriptConfig load_script(const std::string& name) {
  auto p = programs_dir() / (name + ".script");
  return std::filesystem::exists(p) ? io::load_script_config(p) : io::ScriptConfig{};
}

inline std::unique_ptr<io::ScriptedBackend> scripted(const std::string& name) {
  return std::make_unique<io::ScriptedBackend>(load_script(name));
}

// Random values of every kind, nested variants included.
inline Value random_value(std::mt19937_64& rng, int depth = 2) {
  switch (rng() % 8) {
  case 0: return Value(Unit{});
  case 1: return Value(rng() % 2 == 0);
  case 2: {
    const std::int64_t edges[] = {0, -1, INT64_MIN, INT64_MAX};
    return rng() % 4 == 0 ? Value(edges[rng() % 4]) : Value(static_cast<std::int64_t>(rng()));
  }
  case 3: {
    const char32_t chars[] = {U'a', U'\n', U'\'', U'\\', U'\0', U'\u00e9', U'\u4e2d', U'\U0001F600'};
    return Value::character(chars[rng() % 8]);
  }
  case 4: {
    std::string s;
    for (int n = static_cast<int>(rng() % 6); n > 0; --n) {
      const char32_t pick[] = {U'x', U'"', U'\t', U'\u00e9', U'\U0001F600', U' '};
      append_utf8(s, pick[rng() % 6]);
    }
    return Value(s);
  }
  case 5: return Value::eof();
  case 6: return Value::handle(static_cast<std::int64_t>(rng() % 100));
  default: {
    const char* tags[] = {"yes", "no", "ok", "error"};
    Variant v{tags[rng() % 4], {}};
    if (depth > 0) {
      for (int n = static_cast<int>(rng() % 3); n > 0; --n) v.payload.push_back(random_value(rng, depth - 1));
    }
    return Value(std::move(v));
  }
  }
}

} // namespace tardi::testing
