#pragma once

#include "tardi/tabling/tabling.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tardi::frontend {

class UsageError : public Error {
public:
  UsageError(std::string message, std::string help, bool help_requested = false)
      : Error(std::move(message)), help(std::move(help)), help_requested(help_requested) {}
  std::string help;
  bool help_requested;
};

struct LaunchConfig {
  enum class Command { debug, run, check };
  enum class Backend { os, script };
  enum class Serve { none, stdio, tcp };

  Command command = Command::debug;
  std::string program;
  tabling::Mode mode = tabling::Mode::full;
  Backend backend = Backend::os;
  std::string backend_path = "."; // sandbox directory or script file
  Serve serve = Serve::none;
  std::uint16_t port = 0;
  std::string input; // file fed to the program's stdin under the os backend
};

/// `args` excludes the program name.
LaunchConfig parse_cli(const std::vector<std::string>& args);

/// Whole command-line tool. Exit codes: 0 normal, 1 usage or load error,
/// 2 program fault, 3 divergence halt.
int run_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace tardi::frontend
