#pragma once

#include <memory>
#include <string>

#include "sgl/program.hpp"
#include "sgl/store.hpp"
#include "sgl/world.hpp"

namespace sgl::testing {

inline std::shared_ptr<Program> compile(const std::string& src, const AnalyzeOptions& opts = {}) {
  return std::make_shared<Program>(compile_program(src, opts));
}

inline std::unique_ptr<World> make_world(const std::string& src, const std::string& world_json,
                                         EngineConfig cfg = {}) {
  auto prog = compile(src);
  Snapshot snap = load_world(*prog, world_json);
  return std::make_unique<World>(prog, snap, cfg);
}

inline Value field(const World& w, ObjectId id, const std::string& name) {
  auto loc = w.snapshot()->locate(id);
  if (!loc) return {};
  const auto& ci = w.program().classes[static_cast<std::size_t>(loc->first)];
  return w.snapshot()->state(id, loc->first, ci.state_index(name));
}

inline double num(const World& w, ObjectId id, const std::string& name) { return field(w, id, name).as_number(); }

}  // namespace sgl::testing
