#pragma once

#include "tardi/lang/ast.hpp"
#include "tardi/primitive.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tardi::lang {

struct CheckError {
  Span span;
  std::string message;
};

class CheckErrors : public Error {
public:
  explicit CheckErrors(std::vector<CheckError> errors);
  std::vector<CheckError> errors;
};

/// A program that passed the static checks. Every variable reference carries
/// its slot, and every call site is resolved to a procedure or a primitive.
struct CheckedProgram {
  Program program;
  std::vector<PrimitiveDescriptor> primitives;
  int entry = -1;

  const Procedure& procedure(int index) const {
    return program.procedures[static_cast<std::size_t>(index)];
  }
  int find_procedure(std::string_view name) const;
};

/// Verifies single assignment, definite binding before use, callee resolution
/// and arities against `primitives`. Throws CheckErrors listing every problem.
CheckedProgram check_program(Program program, std::span<const PrimitiveDescriptor> primitives);

/// Reads, parses and checks a source string; convenience for tools and tests.
std::shared_ptr<const CheckedProgram> compile(std::string_view source,
                                              std::span<const PrimitiveDescriptor> primitives);

} // namespace tardi::lang
