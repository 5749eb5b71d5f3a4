#pragma once

#include <memory>
#include <string>

#include "sgl/world.hpp"

namespace sgl {

/// HTTP/JSON debug API over one world. A single engine thread owns the world
/// and executes requests from a command queue between ticks, so inspection
/// always sees a tick boundary and GET requests never advance the world.
///
///   GET  /schema                  (class, field) -> (table, column)
///   GET  /state/{class}?tick=     rows of one class
///   GET  /object/{id}
///   GET  /effects/{id}?tick=      entries received while advancing from `tick`
///   GET  /plan?class=             plan tree with per-operator cardinalities
///   GET  /stats
///   GET  /breakpoints
///   POST /step {ticks}            halts early on a breakpoint
///   POST /run {untilTick, untilBreakpoint, wait}
///   POST /pause
///   POST /breakpoints {class, cond, enabled}
///   DELETE /breakpoints/{id}
///   POST /checkpoint {path?}
///   POST /restore {checkpoint | path}
///
/// Failures answer 400 (malformed request), 404 (unknown class, object,
/// breakpoint or tick) or 409 (stepping while a run is in progress), with
/// body {"error": {"code", "message"}}.
class DebugServer {
 public:
  explicit DebugServer(std::unique_ptr<World> world);
  ~DebugServer();
  DebugServer(const DebugServer&) = delete;
  DebugServer& operator=(const DebugServer&) = delete;

  /// Binds the listening socket; `port` 0 picks a free port. Returns the
  /// bound port. Throws EngineError E_IO when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves requests until stop(). Requires bind().
  void serve();
  /// Stops serving and halts any run in progress. Safe from any thread.
  void stop();

  /// Checkpoint of the current tick boundary, taken on the engine thread.
  std::string checkpoint();
  std::int64_t tick();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Page served at `/` in place of the browser inspector.
extern const char* const kInspectorPlaceholder;

}  // namespace sgl
