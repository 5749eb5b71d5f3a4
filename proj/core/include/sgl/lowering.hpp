#pragma once

#include <vector>

#include "sgl/program.hpp"

namespace sgl {

/// Single-tick form of one class's behaviour.
struct LoweredScript {
  int cls = -1;
  /// Executed once per object per tick. With waits: an if-chain on `_pc`
  /// selecting segment j; without: segment 0 itself.
  Block body;
  /// segments[j] runs when `_pc == j`. Each ends in exactly one pc
  /// emission when the class has waits (`_pc_next <- k`, `_pc_reset <- 0`,
  /// or `_pc_next <- 0` at script end).
  std::vector<Block> segments;
};

/// Replaces every handler with a prelude `if (cond) { body; [restart;] }`
/// at the start of its class script and after each waitNextTick. Classes
/// with handlers and no script get a script named `handlers`. The result
/// shares (annotated) nodes with the program.
CompilationUnit lower_handlers(Program& prog);

/// Splits a handler-expanded script body at each waitNextTick / restart.
LoweredScript lower_multitick(Program& prog, int cls, const Block& body);

/// lower_handlers + lower_multitick for every class (index = class index;
/// classes without behaviour get an empty body).
std::vector<LoweredScript> lower_program(Program& prog);

}  // namespace sgl
