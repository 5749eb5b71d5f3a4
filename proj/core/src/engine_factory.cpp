#include "sgl/exec.hpp"
#include "sgl/interpreter.hpp"
#include "sgl/world.hpp"

namespace sgl {

std::unique_ptr<EffectPhase> make_engine(const Program& prog, const std::vector<LoweredScript>& scripts,
                                         const EngineConfig& cfg) {
  if (cfg.engine == EngineKind::Reference) return std::make_unique<ReferenceInterpreter>(prog, scripts, cfg.reverse_order);
  return std::make_unique<RelationalEngine>(prog, scripts, cfg);
}

}  // namespace sgl
