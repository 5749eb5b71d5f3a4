#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include "sgl/world.hpp"

namespace sgl {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  std::int64_t tick = 0;
  std::uint64_t checksum = 0;
};

/// Everything needed to continue a run bit-exactly.
struct CheckpointData {
  Snapshot snap;
  std::uint64_t seed = 0;
  std::string engine_state;
  std::size_t txns_committed = 0;
  std::size_t txns_aborted = 0;
};

/// Self-contained JSON document. Doubles round-trip exactly; NaN payloads
/// keep their bits.
std::string checkpoint_text(const World& w);
/// Throws EngineError E_IO when the sink fails.
CheckpointMeta write_checkpoint(const World& w, std::ostream& out);

/// Throws EngineError E_CHECKPOINT_VERSION, E_CHECKPOINT_UNIT (compiled from
/// different source) or E_CHECKPOINT_CORRUPT (checksum or structure).
CheckpointData read_checkpoint(const Program& prog, std::string_view text);

/// A new world continuing from the checkpoint; `cfg.seed` is overridden.
std::unique_ptr<World> restore_world(std::shared_ptr<Program> prog, EngineConfig cfg, std::string_view text);
/// Rewinds an existing world in place.
void restore_into(World& w, std::string_view text);

}  // namespace sgl
