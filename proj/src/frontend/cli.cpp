#include "tardi/frontend/cli.hpp"

#include "tardi/debugger/session.hpp"
#include "tardi/frontend/repl.hpp"
#include "tardi/frontend/server.hpp"
#include "tardi/io/os_backend.hpp"
#include "tardi/io/scripted_backend.hpp"
#include "tardi/lang/lexer.hpp"
#include "tardi/lang/parser.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace tardi::frontend {

namespace {

struct Options {
  std::string program;
  std::string table_io = "full";
  std::string backend = "os:.";
  std::string serve;
  std::string input;
};

void add_common(CLI::App& sub, Options& o, bool debug) {
  sub.add_option("program", o.program, "source file")->required();
  if (!debug && sub.get_name() == "check") return;
  sub.add_option("--table-io", o.table_io, "I/O tabling mode")
      ->check(CLI::IsMember({"off", "full", "manual"}))
      ->capture_default_str();
  sub.add_option("--backend", o.backend, "os:DIR or script:FILE")->capture_default_str();
  sub.add_option("--input", o.input, "file for the program's stdin (os backend)");
  if (debug) sub.add_option("--serve", o.serve, "stdio or tcp:PORT");
}

} // namespace

LaunchConfig parse_cli(const std::vector<std::string>& args) {
  CLI::App app{"time-travel debugger with I/O tabling", "tardi"};
  app.require_subcommand(1);
  Options o;
  CLI::App* debug = app.add_subcommand("debug", "debug a program interactively");
  CLI::App* run = app.add_subcommand("run", "run a program to completion");
  CLI::App* check = app.add_subcommand("check", "parse and check a program");
  add_common(*debug, o, true);
  add_common(*run, o, false);
  add_common(*check, o, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError("help requested", app.help(), true);
  } catch (const CLI::ParseError& e) {
    std::string help = app.help();
    for (CLI::App* sub : {debug, run, check}) {
      if (sub->parsed()) help = sub->help();
    }
    throw UsageError(e.what(), help);
  }

  LaunchConfig c;
  c.command = debug->parsed() ? LaunchConfig::Command::debug
              : run->parsed() ? LaunchConfig::Command::run
                              : LaunchConfig::Command::check;
  CLI::App* used = debug->parsed() ? debug : run->parsed() ? run : check;
  c.program = o.program;
  c.mode = *tabling::parse_mode(o.table_io);
  c.input = o.input;

  auto colon = o.backend.find(':');
  std::string kind = o.backend.substr(0, colon);
  if (colon == std::string::npos || colon + 1 == o.backend.size() || (kind != "os" && kind != "script")) {
    throw UsageError("--backend must be os:DIR or script:FILE, got " + o.backend, used->help());
  }
  c.backend = kind == "os" ? LaunchConfig::Backend::os : LaunchConfig::Backend::script;
  c.backend_path = o.backend.substr(colon + 1);

  if (!o.serve.empty()) {
    if (o.serve == "stdio") {
      c.serve = LaunchConfig::Serve::stdio;
    } else if (o.serve.rfind("tcp:", 0) == 0) {
      c.serve = LaunchConfig::Serve::tcp;
      const std::string port = o.serve.substr(4);
      unsigned long p = 0;
      std::size_t used_chars = 0;
      try {
        p = std::stoul(port, &used_chars);
      } catch (const std::exception&) {
        used_chars = 0;
      }
      if (port.empty() || used_chars != port.size() || p > 65535) {
        throw UsageError("bad port in --serve " + o.serve, used->help());
      }
      c.port = static_cast<std::uint16_t>(p);
    } else {
      throw UsageError("--serve must be stdio or tcp:PORT, got " + o.serve, used->help());
    }
  }
  return c;
}

namespace {

std::shared_ptr<const lang::CheckedProgram> load_program(const std::string& path, std::ostream& err) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    err << "tardi: cannot read " << path << '\n';
    return nullptr;
  }
  std::stringstream text;
  text << file.rdbuf();
  try {
    return lang::compile(text.str(), io::registry());
  } catch (const lang::CheckErrors& e) {
    for (const lang::CheckError& ce : e.errors) {
      err << path << ":" << ce.span.line << ":" << ce.span.col << ": " << ce.message << '\n';
    }
  } catch (const Error& e) {
    // Lexer and parser messages already start with line:col.
    err << path << ":" << e.what() << '\n';
  }
  return nullptr;
}

} // namespace

int run_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  LaunchConfig config;
  try {
    config = parse_cli(args);
  } catch (const UsageError& e) {
    if (e.help_requested) {
      out << e.help;
      return 0;
    }
    err << "tardi: " << e.what() << "\n\n" << e.help;
    return 1;
  }

  auto program = load_program(config.program, err);
  if (!program) return 1;
  if (config.command == LaunchConfig::Command::check) {
    out << config.program << ": ok\n";
    return 0;
  }

  // Program stdin: --input if given; the terminal only for `run`, since the
  // debugger console and the stdio protocol both read commands from it.
  std::ifstream input_file;
  std::istringstream no_input;
  std::istream* program_in = &no_input;
  if (!config.input.empty()) {
    input_file.open(config.input, std::ios::binary);
    if (!input_file) {
      err << "tardi: cannot read " << config.input << '\n';
      return 1;
    }
    program_in = &input_file;
  } else if (config.command == LaunchConfig::Command::run) {
    program_in = &in;
  }
  std::ostream& program_out = config.serve == LaunchConfig::Serve::stdio ? err : out;

  std::unique_ptr<io::IoBackend> backend;
  io::ScriptedBackend* scripted = nullptr;
  try {
    if (config.backend == LaunchConfig::Backend::script) {
      auto b = std::make_unique<io::ScriptedBackend>(io::load_script_config(config.backend_path));
      scripted = b.get();
      backend = std::move(b);
    } else {
      backend = std::make_unique<io::OsBackend>(config.backend_path, *program_in, program_out);
    }
  } catch (const Error& e) {
    err << "tardi: " << e.what() << '\n';
    return 1;
  }

  debugger::Session session(program, std::move(backend),
                            debugger::Session::Settings{config.mode, config.program});

  int code = 0;
  if (config.command == LaunchConfig::Command::run) {
    session.set_event_sink([&](const debugger::DebugEvent& ev) {
      if (auto* s = std::get_if<debugger::StoppedEvent>(&ev)) {
        err << "tardi: " << format_event(*s) << '\n';
      } else if (std::holds_alternative<debugger::DivergenceEvent>(ev)) {
        err << "tardi: " << format_event(ev) << '\n';
      }
    });
    session.cmd_continue();
    code = session.exit_code();
  } else if (config.serve == LaunchConfig::Serve::stdio) {
    ProtocolServer server(session);
    serve_stream(server, in, out);
    code = session.exit_code();
  } else if (config.serve == LaunchConfig::Serve::tcp) {
    ProtocolServer server(session);
    try {
      serve_tcp(server, config.port, [&](std::uint16_t port) {
        err << "tardi: listening on 127.0.0.1:" << port << std::endl;
      });
    } catch (const Error& e) {
      err << "tardi: " << e.what() << '\n';
      return 1;
    }
    code = session.exit_code();
  } else {
    code = repl(session, in, out);
  }
  if (scripted) program_out << scripted->stdout_text();
  out.flush();
  return code;
}

} // namespace tardi::frontend
