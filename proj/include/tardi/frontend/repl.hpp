#pragma once

#include "tardi/debugger/session.hpp"

#include <iosfwd>
#include <string>

namespace tardi::frontend {

std::string format_event(const debugger::DebugEvent& ev);

/// Line-oriented debugger console. Returns the session exit code when the
/// user quits or input ends.
int repl(debugger::Session& session, std::istream& in, std::ostream& out);

} // namespace tardi::frontend
