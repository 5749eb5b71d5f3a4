#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "sgl/scenarios.hpp"

using namespace sgl::cli;

namespace {

/// Flags shared by run and debug.
void add_run_flags(CLI::App& cmd, RunConfig& rc, std::string& config) {
  cmd.add_option("sources", rc.sources, "SGL source files");
  cmd.add_option("--world", rc.world, "initial world document (JSON)");
  cmd.add_option("--engine", rc.engine, "relational or reference")->check(CLI::IsMember({"relational", "reference"}));
  cmd.add_option("--workers", rc.workers, "worker threads for the relational engine");
  cmd.add_option("--seed", rc.seed, "seed for random()");
  cmd.add_option("--pin-plan", rc.pin_plan, "profile name or plan id; disables plan switching");
  cmd.add_option("--trace", rc.trace, "NDJSON trace log path");
  cmd.add_option("--trace-classes", rc.trace_classes, "restrict effect logging to these target classes");
  cmd.add_option("--checkpoint-on-exit", rc.checkpoint_on_exit, "checkpoint path written on exit");
  cmd.add_option("--restore", rc.restore, "start from a checkpoint instead of --world");
  cmd.add_option("--config", config, "JSON config; explicit flags win");
}

std::vector<std::string> given_flags(const CLI::App& cmd) {
  std::vector<std::string> out;
  for (const CLI::Option* o : cmd.get_options()) {
    if (o->count() == 0) continue;
    std::string name = o->get_name(false, true);
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    out.push_back(name);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGL: game scripts compiled to relational algebra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sgl 0.1.0");

  CompileConfig cc;
  auto* compile = app.add_subcommand("compile", "check sources; optionally emit the plan or schema");
  compile->add_option("sources", cc.sources, "SGL source files")->required();
  compile->add_option("--emit-plan", cc.emit_plan, "write plan JSON to a file ('-' for stdout)");
  compile->add_option("--emit-schema", cc.emit_schema, "write the table map to a file ('-' for stdout)");
  compile->add_option("--world", cc.world, "world document supplying extent sizes for plan choice");
  compile->add_option("--extent", cc.extent, "assumed extent size without --world");

  RunConfig rc;
  std::string run_config;
  auto* run = app.add_subcommand("run", "run a world for a number of ticks");
  add_run_flags(*run, rc, run_config);
  run->add_option("--ticks", rc.ticks, "ticks to run");
  run->add_option("--dump-state-every", rc.dump_state_every, "write state-<tick>.json every K ticks");
  run->add_option("--dump-dir", rc.dump_dir, "directory for state dumps");
  run->add_option("--state-out", rc.state_out, "write the final state document here");
  run->add_flag("--trace-effects", rc.trace_effects, "log every effect entry to the trace");
  run->add_flag("--quiet", rc.quiet, "no summary line");

  RunConfig dc;
  dc.trace_effects = true;
  std::string debug_config;
  bool no_effect_log = false;
  auto* debug = app.add_subcommand("debug", "serve the HTTP debug API, paused at the start");
  add_run_flags(*debug, dc, debug_config);
  debug->add_option("--port", dc.port, "listening port (0 picks one)");
  debug->add_option("--host", dc.host, "listening address");
  debug->add_flag("--no-effect-log", no_effect_log, "disable per-object effect provenance");

  BenchConfig bc;
  auto* bench = app.add_subcommand("bench", "relational vs reference ticks/sec on a bundled scenario");
  bench->add_option("scenario", bc.scenario, "bundled scenario")->check(CLI::IsMember(sgl::scenario_names()));
  bench->add_option("--sizes", bc.sizes, "object counts")->delimiter(',');
  bench->add_option("--ticks", bc.ticks, "relational ticks per size");
  bench->add_option("--reference-ticks", bc.reference_ticks, "reference ticks per size");
  bench->add_option("--workers", bc.workers, "relational worker threads");
  bench->add_option("--seed", bc.seed, "world and random() seed");
  bench->add_option("--json", bc.json_out, "also write results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kIo;
  }

  try {
    if (*compile) return cmd_compile(cc);
    if (*run) {
      if (!run_config.empty()) apply_config_file(rc, run_config, given_flags(*run));
      return cmd_run(rc);
    }
    if (*debug) {
      if (!debug_config.empty()) apply_config_file(dc, debug_config, given_flags(*debug));
      if (no_effect_log) dc.trace_effects = false;
      return cmd_debug(dc);
    }
    if (*bench) return cmd_bench(bc);
  } catch (const Failure& f) {
    std::cerr << "sgl: " << f.what() << '\n';
    return f.code;
  }
  return kOk;
}
