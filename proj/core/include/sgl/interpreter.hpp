#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgl/effects.hpp"
#include "sgl/lowering.hpp"
#include "sgl/program.hpp"
#include "sgl/store.hpp"
#include "sgl/world.hpp"

namespace sgl {

/// Object-at-a-time oracle: runs each object's lowered script as ordinary
/// imperative code against the tick-start snapshot, with accum-loops as
/// literal loops.
class ReferenceInterpreter final : public EffectPhase {
 public:
  ReferenceInterpreter(const Program& prog, const std::vector<LoweredScript>& scripts, bool descending = false)
      : prog_(prog), scripts_(scripts), descending_(descending) {}

  EffectBuffer run(const Snapshot& snap, std::uint64_t seed, std::vector<std::string>& notes) override;

  /// Effects of a single object (faults reported in the buffer).
  EffectBuffer run_object(const Tables& snap, int cls, ObjectId id, std::uint64_t seed) const;

 private:
  const Program& prog_;
  const std::vector<LoweredScript>& scripts_;
  bool descending_;
};

}  // namespace sgl
