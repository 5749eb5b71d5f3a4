#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgl {

/// Bundled workload: program source plus a generated world document.
struct Scenario {
  std::string name;
  std::string source;
  std::string world;
  std::int64_t phase_tick = -1;  // battle: first tick of the clustered phase
};

/// fig2-count, shop, quest, quest-explicit, battle.
std::vector<std::string> scenario_names();

/// `n` objects of the main class; the same (name, n, seed) always yields the
/// same text. Throws std::invalid_argument for an unknown name.
Scenario make_scenario(const std::string& name, std::size_t n, std::uint64_t seed);

/// Uniform [0,1) from a 64-bit generator, identical on every platform.
class WorldRng {
 public:
  explicit WorldRng(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next();
  double uniform() { return static_cast<double>(next() >> 11) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::uint64_t s_;
};

}  // namespace sgl
