#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "sgl/components.hpp"
#include "sgl/effects.hpp"
#include "sgl/lowering.hpp"
#include "sgl/program.hpp"
#include "sgl/store.hpp"
#include "sgl/trace.hpp"

namespace sgl {

enum class EngineKind { Relational, Reference };

struct OptimizerConfig {
  std::string pinned;             // "", a profile name or a plan id: disables switching
  double deviation_ratio = 4.0;   // observed/estimated cardinality ratio that counts as a miss
  int hysteresis_ticks = 3;       // consecutive misses before switching profile
  double decay = 0.5;             // exponential decay of observed cardinalities
};

struct EngineConfig {
  EngineKind engine = EngineKind::Relational;
  int workers = 1;
  std::uint64_t seed = 0;
  bool reverse_order = false;     // reference engine: visit objects in descending id order
  double index_rebuild_fraction = 0.25;
  OptimizerConfig optimizer;
  std::vector<PhysicsConfig> physics;
  TraceConfig trace;
};

/// Produces one tick's effects from a snapshot. The only phase that differs
/// between the relational engine and the reference interpreter.
class EffectPhase {
 public:
  virtual ~EffectPhase() = default;
  virtual EffectBuffer run(const Snapshot& snap, std::uint64_t seed, std::vector<std::string>& notes) = 0;
  /// Adaptive state that influences future ticks (plan choice), as JSON text.
  virtual std::string save_state() const { return "{}"; }
  virtual void load_state(const std::string&) {}
};

struct TickReport {
  std::int64_t tick = 0;  // tick after the step
  std::size_t entries = 0;
  std::size_t faults = 0;
  std::size_t txns_committed = 0;
  std::size_t txns_aborted = 0;
  std::size_t spawned = 0;
  std::size_t destroyed = 0;
  double effect_ms = 0;
  double update_ms = 0;
};

/// A running simulation: compiled program, current snapshot, update
/// components and the effect engine.
class World {
 public:
  /// Rejects an initial state that violates a constraint (EngineError E_CONSTRAINT).
  World(std::shared_ptr<Program> prog, Snapshot initial, EngineConfig cfg);
  ~World();

  /// Adds an external component. Throws EngineError E_UNPARTITIONED_STATE
  /// on overlap, E_REGISTRATION_CLOSED after the first tick.
  void register_update_component(std::shared_ptr<UpdateComponent> comp);

  TickReport run_tick();

  const Program& program() const { return *prog_; }
  std::shared_ptr<Program> program_ptr() const { return prog_; }
  const EngineConfig& config() const { return cfg_; }
  const Snapshot& snapshot() const { return snap_; }
  std::int64_t tick() const { return snap_->tick; }
  const std::vector<LoweredScript>& lowered() const { return lowered_; }
  EffectPhase& engine() { return *engine_; }
  const EffectPhase& engine() const { return *engine_; }
  const std::vector<std::shared_ptr<UpdateComponent>>& components() const { return comps_; }

  /// Retained history (most recent last).
  const std::deque<TickLog>& logs() const { return logs_; }
  const TickLog* log_for(std::int64_t tick) const;
  Snapshot snapshot_at(std::int64_t tick) const;

  /// Replaces the current state and a fresh engine's adaptive state
  /// (checkpoint restore). Clears history.
  void reset(Snapshot snap, const std::string& engine_state);
  void set_seed(std::uint64_t seed) { cfg_.seed = seed; }
  std::size_t txns_committed_total() const { return txns_committed_; }
  std::size_t txns_aborted_total() const { return txns_aborted_; }
  void set_txn_totals(std::size_t committed, std::size_t aborted) {
    txns_committed_ = committed;
    txns_aborted_ = aborted;
  }

 private:
  std::shared_ptr<Program> prog_;
  EngineConfig cfg_;
  std::vector<LoweredScript> lowered_;
  std::unique_ptr<EffectPhase> engine_;
  Snapshot snap_;
  std::vector<std::shared_ptr<UpdateComponent>> comps_;
  std::vector<std::vector<std::uint8_t>> owner_of_;  // [component] -> flag per flattened field
  bool closed_ = false;
  std::deque<TickLog> logs_;
  std::deque<Snapshot> history_;
  std::size_t txns_committed_ = 0;
  std::size_t txns_aborted_ = 0;

  void close_registration();
};

std::unique_ptr<EffectPhase> make_engine(const Program& prog, const std::vector<LoweredScript>& scripts,
                                         const EngineConfig& cfg);

}  // namespace sgl
