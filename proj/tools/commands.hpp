#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgl/world.hpp"

namespace sgl::cli {

enum Exit : int { kOk = 0, kDiagnostics = 1, kIo = 2, kInvariant = 3 };

/// Aborts a command with an exit code; the message goes to stderr.
struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct RunConfig {
  std::vector<std::string> sources;
  std::string world;
  std::int64_t ticks = 100;
  std::string engine = "relational";
  int workers = 1;
  std::uint64_t seed = 0;
  std::string pin_plan;
  std::int64_t dump_state_every = 0;
  std::string dump_dir = ".";
  std::string state_out;
  std::string trace;                      // NDJSON path
  bool trace_effects = false;
  std::vector<std::string> trace_classes;  // effect logging filter
  std::string checkpoint_on_exit;
  std::string restore;
  std::string host = "127.0.0.1";
  int port = 7070;
  OptimizerConfig optimizer;
  std::vector<PhysicsConfig> physics;
  bool quiet = false;
};

struct CompileConfig {
  std::vector<std::string> sources;
  std::string emit_plan;    // "-" for stdout
  std::string emit_schema;  // "-" for stdout
  std::string world;        // extent sizes for plan choice
  std::size_t extent = 1000;  // assumed extent size without a world
};

struct BenchConfig {
  std::string scenario = "fig2-count";
  std::vector<std::size_t> sizes{100, 1000, 10000};
  int ticks = 10;
  int reference_ticks = 3;
  int workers = 1;
  std::uint64_t seed = 1;
  std::string json_out;
};

int cmd_compile(const CompileConfig& cc);
int cmd_run(const RunConfig& rc);
int cmd_debug(const RunConfig& rc);
int cmd_bench(const BenchConfig& bc);

/// Loads and merges a JSON config file (see README for keys). `given`
/// holds the flag names present on the command line.
void apply_config_file(RunConfig& rc, const std::string& path, const std::vector<std::string>& given);

}  // namespace sgl::cli
