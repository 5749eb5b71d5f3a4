#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sgl/effects.hpp"
#include "sgl/program.hpp"
#include "sgl/txn.hpp"

namespace sgl {

struct TraceConfig {
  bool effects = false;                     // effect-entry logging (off by default)
  std::vector<std::string> effect_classes;  // restrict effect logging to these target classes; empty = all
  std::size_t retain_ticks = 128;           // in-memory logs and snapshots kept for inspection
};

/// Everything observed while advancing from `tick` to `tick + 1`.
struct TickLog {
  std::int64_t tick = 0;
  bool effects_logged = false;
  std::vector<EffectEntry> committed;  // effect logging only
  std::vector<EffectEntry> aborted;    // effect logging only
  std::vector<FaultRecord> faults;     // script faults; the source's effects were dropped
  std::vector<FaultRecord> update_faults;
  std::vector<TxnRecord> txns;
  std::vector<ObjectId> frozen;
  std::vector<SpawnEntry> rejected_spawns;
  std::vector<std::string> plan_switches;
  std::vector<std::pair<std::string, std::size_t>> component_updates;  // (component, rows written)
  std::vector<ObjectId> spawned;
  std::vector<ObjectId> destroyed;
};

/// Entries assigned to one effect field of one object in one tick.
struct EffectView {
  int cls = -1;
  int field = -1;
  std::vector<EffectEntry> entries;  // canonical order, committed then aborted
  std::vector<bool> aborted;
  Value reduced;                     // from committed entries only; Absent if none
};

/// Effect provenance for `id` in `log`, grouped by field. Empty when
/// effect logging was off or the object received nothing.
std::vector<EffectView> effects_of(const Program& prog, const TickLog& log, ObjectId id);

/// Appends the log as newline-delimited JSON records, ordered by sequence
/// within the tick: effectEntry, txnOutcome, fault, planSwitch,
/// componentUpdate, spawn, destroy.
void write_ndjson(const Program& prog, const TickLog& log, std::ostream& os);

}  // namespace sgl
