#pragma once

#include <cstdint>
#include <string>

namespace tardi {

/// Sequence number of one dynamic call to an effectful primitive.
using ActionNumber = std::uint64_t;

/// Signature of a built-in primitive. Effectful primitives go through I/O tabling;
/// pure ones are plain functions of their inputs.
struct PrimitiveDescriptor {
  std::string name;
  int n_inputs = 0;
  int n_outputs = 0;
  bool effectful = false;
};

} // namespace tardi
