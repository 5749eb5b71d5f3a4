#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sgl/effects.hpp"
#include "sgl/program.hpp"
#include "sgl/store.hpp"
#include "sgl/txn.hpp"

namespace sgl {

/// (class index, state field index)
using FieldKey = std::pair<int, int>;

struct UpdateContext {
  const Program& prog;
  const Tables& snap;
  const ReducedEffects& effects;
  const Admission& admission;
  std::int64_t tick;
};

/// Owns a disjoint set of state fields and computes their next values.
/// May read the whole snapshot and every reduced effect.
class UpdateComponent {
 public:
  virtual ~UpdateComponent() = default;
  virtual std::string name() const = 0;
  virtual std::vector<FieldKey> claims(const Program& prog) const = 0;
  /// Appends updates for owned fields only; per-object rule faults go to
  /// `faults` and leave the field unchanged.
  virtual void update(const UpdateContext& ctx, std::vector<RowUpdate>& out,
                      std::vector<FaultRecord>& faults) const = 0;
};

/// Built-in updater for every field no other component owns: evaluates
/// update rules and advances `_pc`.
class ExpressionUpdater final : public UpdateComponent {
 public:
  explicit ExpressionUpdater(std::vector<FieldKey> owned) : owned_(std::move(owned)) {}
  std::string name() const override { return "expression"; }
  std::vector<FieldKey> claims(const Program&) const override { return owned_; }
  void update(const UpdateContext& ctx, std::vector<RowUpdate>& out, std::vector<FaultRecord>& faults) const override;

 private:
  std::vector<FieldKey> owned_;
};

/// Owns constrained fields and lastTxnStatus; publishes admission results.
class TxnComponent final : public UpdateComponent {
 public:
  std::string name() const override { return "txn"; }
  std::vector<FieldKey> claims(const Program& prog) const override;
  void update(const UpdateContext& ctx, std::vector<RowUpdate>& out, std::vector<FaultRecord>& faults) const override;
};

struct PhysicsConfig {
  std::string cls;
  std::string x = "x";
  std::string y = "y";
  std::string vx = "vx";  // intention effects; absent reads as 0
  std::string vy = "vy";
  double min_x = 0, min_y = 0, max_x = 100, max_y = 100;
};

/// Demo physics: position += intended velocity, clamped to bounds. Objects
/// are placed in ascending id order; one landing in an occupied unit cell
/// moves to the nearest free cell (ties by dy, then dx).
class PhysicsComponent final : public UpdateComponent {
 public:
  explicit PhysicsComponent(PhysicsConfig cfg) : cfg_(std::move(cfg)) {}
  std::string name() const override { return "physics:" + cfg_.cls; }
  std::vector<FieldKey> claims(const Program& prog) const override;
  void update(const UpdateContext& ctx, std::vector<RowUpdate>& out, std::vector<FaultRecord>& faults) const override;

 private:
  PhysicsConfig cfg_;
};

/// Throws EngineError E_UNPARTITIONED_STATE when two components claim one field.
void check_partition(const Program& prog, const std::vector<std::shared_ptr<UpdateComponent>>& comps);

/// Every state field not claimed by `comps`.
std::vector<FieldKey> unclaimed_fields(const Program& prog, const std::vector<std::shared_ptr<UpdateComponent>>& comps);

}  // namespace sgl
