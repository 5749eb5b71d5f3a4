#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sgl/effects.hpp"
#include "sgl/plan.hpp"
#include "sgl/range_index.hpp"
#include "sgl/store.hpp"
#include "sgl/world.hpp"

namespace sgl {

/// Per-class plan selection state.
struct ClassPlanState {
  bool compiled = false;
  PlanSet set;
  int active = 0;
  std::vector<double> rows;     // per operator node, last tick
  std::vector<double> decayed;  // per operator node, exponentially decayed
  std::vector<double> fanout;   // per join: decayed rows passing the leading filter per outer row
  bool seen = false;            // decayed values initialised
  int misses = 0;               // consecutive ticks off the active profile
  std::int64_t switched_at = -1;
};

/// Executes every class's compiled plan set-at-a-time over a snapshot.
class RelationalEngine final : public EffectPhase {
 public:
  RelationalEngine(const Program& prog, const std::vector<LoweredScript>& scripts, const EngineConfig& cfg);
  ~RelationalEngine() override;

  EffectBuffer run(const Snapshot& snap, std::uint64_t seed, std::vector<std::string>& notes) override;
  std::string save_state() const override;
  void load_state(const std::string& state) override;

  /// Null when the class has no behaviour.
  const ClassPlanState* plans(int cls) const;
  std::string plan_json(int cls) const;
  std::size_t index_rebuilds() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Executes one physical plan over one snapshot (no plan selection).
/// `rows` receives per-node output cardinalities.
EffectBuffer execute_plan(const Program& prog, const PlanTemplate& tmpl, const PhysicalPlan& plan,
                          const Tables& snap, std::uint64_t seed, int workers, std::vector<double>* rows = nullptr);

}  // namespace sgl
