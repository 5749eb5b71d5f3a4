#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "sgl/effects.hpp"
#include "sgl/program.hpp"
#include "sgl/store.hpp"

namespace sgl {

/// (issuing object, atomic site). Every execution of one site by one
/// object within a tick belongs to the same transaction.
struct TxnId {
  ObjectId issuer = kNullId;
  int site = -1;
  friend auto operator<=>(const TxnId&, const TxnId&) = default;
};

struct TxnRecord {
  TxnId id;
  bool committed = false;
  std::vector<ObjectId> touched;
  ObjectId violated_object = kNullId;  // aborted: first object whose constraint failed
  int violated_constraint = -1;        // index into that class's constraints
  std::string fault;                   // aborted by a rule or constraint fault
  std::size_t entries = 0;
};

struct Admission {
  std::vector<EffectEntry> committed;  // non-transactional plus committed, canonical order
  std::vector<EffectEntry> aborted;
  std::vector<SpawnEntry> spawns;      // admitted spawns, canonical order
  std::vector<SpawnEntry> rejected_spawns;
  std::vector<DestroyEntry> destroys;
  std::vector<TxnRecord> txns;         // ascending TxnId
  /// New values of constrained fields and lastTxnStatus (changed rows only).
  std::vector<RowUpdate> owned_updates;
  /// Objects whose constrained fields were held because their ordinary
  /// post-state violated a constraint.
  std::vector<ObjectId> frozen;
};

/// Greedy admission in ascending TxnId order. A transaction commits iff
/// every constraint of every object it targets (and of every object it
/// spawns) holds on the tentative post-state computed from all entries
/// committed so far plus its own. `buf` must be canonical with faulted
/// sources dropped.
Admission admit(const Program& prog, const Tables& snap, const EffectBuffer& buf, std::int64_t tick);

struct Violation {
  ObjectId id = kNullId;
  int cls = -1;
  int constraint = -1;
  std::string fault;
};

/// Every (object, constraint) that does not evaluate to true on `snap`.
std::vector<Violation> check_constraints(const Program& prog, const Tables& snap);

}  // namespace sgl
