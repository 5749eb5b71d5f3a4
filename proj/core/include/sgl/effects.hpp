#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgl/program.hpp"
#include "sgl/value.hpp"

namespace sgl {

/// One effect assignment with its provenance.
struct EffectEntry {
  ObjectId target = kNullId;
  int cls = -1;
  int field = -1;
  Value value;
  ObjectId source = kNullId;
  int stmt = -1;
  int txn_site = -1;  // -1: not part of a transaction
};

struct SpawnEntry {
  int cls = -1;
  std::vector<std::pair<int, Value>> inits;  // (state field, coerced value), declaration order of the spawn
  ObjectId source = kNullId;
  int stmt = -1;
  int txn_site = -1;
};

struct DestroyEntry {
  ObjectId target = kNullId;
  ObjectId source = kNullId;
  int stmt = -1;
  int txn_site = -1;
};

struct FaultRecord {
  ObjectId source = kNullId;
  int cls = -1;
  std::string cause;
};

/// Output of the effect phase for one tick.
struct EffectBuffer {
  std::vector<EffectEntry> entries;
  std::vector<SpawnEntry> spawns;
  std::vector<DestroyEntry> destroys;
  std::vector<FaultRecord> faults;

  void append(EffectBuffer&& other);
  /// Sorts every list into canonical order; the result is independent of
  /// the order entries were produced in.
  void canonicalize();
  /// Removes every entry, spawn and destroy issued by a faulted source.
  void drop_faulted();
};

bool entry_less(const EffectEntry& a, const EffectEntry& b);
bool spawn_less(const SpawnEntry& a, const SpawnEntry& b);
bool destroy_less(const DestroyEntry& a, const DestroyEntry& b);
bool fault_less(const FaultRecord& a, const FaultRecord& b);
/// Faults match on source only; causes may be worded differently per engine.
bool buffers_identical(const EffectBuffer& a, const EffectBuffer& b);

/// Reduced values of one effect field, ids ascending.
struct ReducedField {
  std::vector<ObjectId> ids;
  std::vector<Value> vals;

  /// Absent when the object received no assignment.
  Value lookup(ObjectId id) const;
};

struct ReducedEffects {
  std::vector<std::vector<ReducedField>> fields;  // [class][effect field]

  /// Reduced value, the combinator identity when nothing was assigned, or
  /// Absent for avg/min/max with no assignment.
  Value get(const Program& prog, int cls, int field, ObjectId id) const;
};

/// Reduces canonical-order entries; each (class, field, target) group is
/// combined in canonical order.
ReducedEffects reduce_effects(const Program& prog, std::span<const EffectEntry> sorted_entries);

/// Reduction of a single group in canonical order.
Value reduce_group(const EffectField& f, std::span<const EffectEntry> group);

}  // namespace sgl
