#include "commands.hpp"

#include <signal.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sgl/checkpoint.hpp"
#include "sgl/debug_server.hpp"
#include "sgl/diagnostics.hpp"
#include "sgl/exec.hpp"
#include "sgl/lowering.hpp"
#include "sgl/plan.hpp"
#include "sgl/scenarios.hpp"
#include "sgl/schema.hpp"
#include "sgl/store.hpp"

namespace sgl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Failure(kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw Failure(kIo, "cannot write " + path);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Source files joined into one unit; diagnostics map back to file and line.
struct Sources {
  std::string text;
  std::vector<std::pair<std::string, int>> starts;  // (path, first line in `text`)

  std::string where(const Diagnostic& d) const {
    std::string file;
    int line = d.loc.line;
    for (const auto& [path, first] : starts) {
      if (d.loc.line >= first) {
        file = path;
        line = d.loc.line - first + 1;
      }
    }
    Diagnostic local = d;
    local.loc.line = line;
    return format_diagnostic(local, file);
  }
};

Sources read_sources(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Failure(kIo, "no source files given");
  Sources s;
  int line = 1;
  for (const auto& p : paths) {
    std::string t = read_file(p);
    if (!t.empty() && t.back() != '\n') t += '\n';
    s.starts.emplace_back(p, line);
    line += static_cast<int>(std::count(t.begin(), t.end(), '\n'));
    s.text += t;
  }
  return s;
}

std::shared_ptr<Program> compile_sources(const Sources& src, const AnalyzeOptions& opts = {}) {
  try {
    return std::make_shared<Program>(compile_program(src.text, opts));
  } catch (const CompileError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << src.where(d) << '\n';
    throw Failure(kDiagnostics, "");
  }
}

int engine_exit(const EngineError& e) {
  const std::string& c = e.code();
  if (c == "E_WORLD" || c == "E_CONSTRAINT") return kDiagnostics;
  if (c == "E_IO" || c == "E_CONFIG" || c.rfind("E_CHECKPOINT", 0) == 0) return kIo;
  return kInvariant;
}

EngineConfig engine_config(const RunConfig& rc) {
  EngineConfig cfg;
  if (rc.engine == "relational") {
    cfg.engine = EngineKind::Relational;
  } else if (rc.engine == "reference") {
    cfg.engine = EngineKind::Reference;
  } else {
    throw Failure(kIo, "unknown engine '" + rc.engine + "' (relational or reference)");
  }
  if (rc.workers < 1) throw Failure(kIo, "--workers must be at least 1");
  cfg.workers = rc.workers;
  cfg.seed = rc.seed;
  cfg.optimizer = rc.optimizer;
  if (!rc.pin_plan.empty()) cfg.optimizer.pinned = rc.pin_plan;
  cfg.physics = rc.physics;
  cfg.trace.effects = rc.trace_effects;
  cfg.trace.effect_classes = rc.trace_classes;
  return cfg;
}

/// Compiled program plus a world at tick 0 (or restored from a checkpoint).
std::unique_ptr<World> open_world(const RunConfig& rc) {
  EngineConfig cfg = engine_config(rc);
  AnalyzeOptions opts;
  for (const auto& p : rc.physics) opts.claims.push_back({"physics:" + p.cls, p.cls, {p.x, p.y}});
  Sources src = read_sources(rc.sources);
  auto prog = compile_sources(src, opts);
  if (!rc.restore.empty()) return restore_world(prog, cfg, read_file(rc.restore));
  if (rc.world.empty()) throw Failure(kIo, "no world document given (--world)");
  std::string doc = read_file(rc.world);
  Snapshot snap = load_world(*prog, doc);
  return std::make_unique<World>(prog, snap, cfg);
}

json optimizer_json(const OptimizerConfig& o) {
  return {{"pinned", o.pinned}, {"deviationRatio", o.deviation_ratio}, {"hysteresisTicks", o.hysteresis_ticks},
          {"decay", o.decay}};
}

/// Everything needed to reproduce the run.
json header_json(const RunConfig& rc, const World& w) {
  json physics = json::array();
  for (const auto& p : rc.physics) {
    physics.push_back({{"class", p.cls}, {"x", p.x}, {"y", p.y}, {"vx", p.vx}, {"vy", p.vy}, {"minX", p.min_x},
                       {"minY", p.min_y}, {"maxX", p.max_x}, {"maxY", p.max_y}});
  }
  json config{{"sources", rc.sources},         {"world", rc.world},     {"restore", rc.restore},
              {"ticks", rc.ticks},             {"engine", rc.engine},   {"workers", rc.workers},
              {"seed", rc.seed},               {"pinPlan", rc.pin_plan}, {"optimizer", optimizer_json(rc.optimizer)},
              {"physics", std::move(physics)}, {"traceEffects", rc.trace_effects},
              {"traceClasses", rc.trace_classes}};
  return {{"kind", "header"}, {"tick", w.tick()}, {"sourceHash", hex64(w.program().hash)}, {"config", std::move(config)}};
}

json stats_json(const World& w, const TickReport& r) {
  json plans = json::object();
  if (auto* rel = dynamic_cast<const RelationalEngine*>(&w.engine())) {
    for (const auto& ci : w.program().classes) {
      const auto* cp = rel->plans(ci.index);
      if (cp && cp->compiled) plans[ci.name] = cp->set.plans[static_cast<std::size_t>(cp->active)].id;
    }
  }
  return {{"kind", "stats"},
          {"tick", r.tick},
          {"entries", r.entries},
          {"faults", r.faults},
          {"txnsCommitted", r.txns_committed},
          {"txnsAborted", r.txns_aborted},
          {"spawned", r.spawned},
          {"destroyed", r.destroyed},
          {"effectMs", r.effect_ms},
          {"updateMs", r.update_ms},
          {"plans", std::move(plans)}};
}

void dump_state(const RunConfig& rc, const World& w) {
  fs::create_directories(rc.dump_dir);
  std::string path = (fs::path(rc.dump_dir) / ("state-" + std::to_string(w.tick()) + ".json")).string();
  write_file(path, dump_world(w.program(), *w.snapshot()));
}

void save_checkpoint(const World& w, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure(kIo, "cannot write " + path);
  write_checkpoint(w, f);
}

/// Runs `body`, mapping failures to exit codes.
template <class Fn>
int guarded(Fn body) {
  try {
    return body();
  } catch (const Failure& f) {
    if (f.what()[0]) std::cerr << "sgl: " << f.what() << '\n';
    return f.code;
  } catch (const CompileError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << format_diagnostic(d) << '\n';
    return kDiagnostics;
  } catch (const EngineError& e) {
    std::cerr << "sgl: " << e.what() << '\n';
    return engine_exit(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "sgl: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace

int cmd_compile(const CompileConfig& cc) {
  return guarded([&] {
    Sources src = read_sources(cc.sources);
    auto prog = compile_sources(src);
    if (!cc.emit_schema.empty()) {
      PhysicalSchema s = derive_schema(*prog);
      json tables = json::array();
      for (const auto& t : s.tables) {
        json cols = json::array();
        for (const auto& [n, ty] : t.columns) cols.push_back({{"name", n}, {"type", ty.str()}});
        tables.push_back({{"name", t.name}, {"columns", std::move(cols)}});
      }
      json fields = json::array();
      for (const auto& [key, ref] : s.fields) {
        fields.push_back({{"class", key.first}, {"field", key.second}, {"table", ref.table}, {"column", ref.column}});
      }
      write_file(cc.emit_schema, json{{"tables", std::move(tables)}, {"fields", std::move(fields)}}.dump(2));
    }
    if (!cc.emit_plan.empty()) {
      std::vector<std::size_t> sizes(prog->classes.size(), cc.extent);
      if (!cc.world.empty()) {
        Snapshot snap = load_world(*prog, read_file(cc.world));
        for (std::size_t c = 0; c < sizes.size(); ++c) sizes[c] = snap->classes[c]->size();
      }
      auto scripts = lower_program(*prog);
      json out = json::object();
      for (std::size_t c = 0; c < scripts.size(); ++c) {
        if (scripts[c].body.empty()) continue;
        PlanSet set = optimize(*prog, compile_to_plan(*prog, scripts[c]), sizes);
        out[prog->classes[c].name] = json::parse(plan_to_json(*prog, set, 0));
      }
      write_file(cc.emit_plan, out.dump(2));
    }
    return kOk;
  });
}

int cmd_run(const RunConfig& rc) {
  return guarded([&] {
    if (rc.ticks < 0) throw Failure(kIo, "--ticks must be >= 0");
    auto w = open_world(rc);
    std::ofstream trace;
    if (!rc.trace.empty()) {
      trace.open(rc.trace, std::ios::binary);
      if (!trace) throw Failure(kIo, "cannot write " + rc.trace);
      trace << header_json(rc, *w).dump() << '\n';
    }
    if (rc.dump_state_every > 0) dump_state(rc, *w);
    auto t0 = std::chrono::steady_clock::now();
    int code = kOk;
    std::int64_t done = 0;
    try {
      for (; done < rc.ticks; ++done) {
        TickReport r = w->run_tick();
        if (trace.is_open()) {
          if (const TickLog* log = w->log_for(r.tick - 1)) write_ndjson(w->program(), *log, trace);
          trace << stats_json(*w, r).dump() << '\n';
        }
        if (rc.dump_state_every > 0 && w->tick() % rc.dump_state_every == 0) dump_state(rc, *w);
      }
    } catch (const EngineError& e) {
      std::cerr << "sgl: tick " << w->tick() << ": " << e.what() << '\n';
      code = engine_exit(e);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (trace.is_open()) {
      trace.close();
      if (!trace) throw Failure(kIo, "cannot write " + rc.trace);
    }
    if (!rc.state_out.empty()) write_file(rc.state_out, dump_world(w->program(), *w->snapshot()));
    if (!rc.checkpoint_on_exit.empty()) save_checkpoint(*w, rc.checkpoint_on_exit);
    if (!rc.quiet) {
      std::fprintf(stderr, "%lld ticks in %.3f s (%.2f ticks/sec), final tick %lld, %zu objects\n",
                   static_cast<long long>(done), secs, secs > 0 ? static_cast<double>(done) / secs : 0.0,
                   static_cast<long long>(w->tick()), w->snapshot()->object_count());
    }
    return code;
  });
}

int cmd_debug(const RunConfig& rc) {
  return guarded([&] {
    auto w = open_world(rc);
    // Signals are taken synchronously by this thread; block them before the
    // server's threads start so they inherit the mask.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    DebugServer server(std::move(w));
    int port = 0;
    try {
      port = server.bind(rc.host, rc.port);
    } catch (const EngineError& e) {
      throw Failure(kIo, e.what());
    }
    std::cout << "listening on http://" << rc.host << ":" << port << std::endl;
    std::thread serving([&] { server.serve(); });
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
    serving.join();
    if (!rc.checkpoint_on_exit.empty()) {
      std::string text = server.checkpoint();
      write_file(rc.checkpoint_on_exit, text);
      std::cerr << "checkpoint at tick " << server.tick() << " written to " << rc.checkpoint_on_exit << '\n';
    }
    return kOk;
  });
}

int cmd_bench(const BenchConfig& bc) {
  return guarded([&] {
    struct Row {
      std::size_t n;
      double rel_ms, ref_ms;
    };
    auto median_ms = [&](const Scenario& sc, EngineKind kind, int ticks) {
      EngineConfig cfg;
      cfg.engine = kind;
      cfg.workers = bc.workers;
      cfg.seed = bc.seed;
      auto prog = std::make_shared<Program>(compile_program(sc.source));
      World w(prog, load_world(*prog, sc.world), cfg);
      std::vector<double> ms;
      for (int t = 0; t < ticks; ++t) {
        auto a = std::chrono::steady_clock::now();
        w.run_tick();
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - a).count());
      }
      std::sort(ms.begin(), ms.end());
      return ms[ms.size() / 2];
    };
    if (bc.ticks < 1 || bc.reference_ticks < 1) throw Failure(kIo, "tick counts must be at least 1");
    std::vector<Row> rows;
    std::printf("scenario %s, seed %llu, workers %d, median of %d relational / %d reference ticks\n",
                bc.scenario.c_str(), static_cast<unsigned long long>(bc.seed), bc.workers, bc.ticks,
                bc.reference_ticks);
    std::printf("%8s %16s %16s %10s\n", "n", "relational t/s", "reference t/s", "speedup");
    for (std::size_t n : bc.sizes) {
      Scenario sc;
      try {
        sc = make_scenario(bc.scenario, n, bc.seed);
      } catch (const std::invalid_argument& e) {
        throw Failure(kIo, e.what());
      }
      Row r{n, median_ms(sc, EngineKind::Relational, bc.ticks), median_ms(sc, EngineKind::Reference, bc.reference_ticks)};
      rows.push_back(r);
      std::printf("%8zu %16.2f %16.2f %9.1fx\n", n, 1000.0 / r.rel_ms, 1000.0 / r.ref_ms, r.ref_ms / r.rel_ms);
      std::fflush(stdout);
    }
    if (!bc.json_out.empty()) {
      json out = json::array();
      for (const auto& r : rows) {
        out.push_back({{"n", r.n},
                       {"relationalMs", r.rel_ms},
                       {"referenceMs", r.ref_ms},
                       {"speedup", r.ref_ms / r.rel_ms}});
      }
      write_file(bc.json_out, json{{"scenario", bc.scenario}, {"seed", bc.seed}, {"rows", std::move(out)}}.dump(2));
    }
    return kOk;
  });
}

void apply_config_file(RunConfig& rc, const std::string& path, const std::vector<std::string>& given) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Failure(kIo, "config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Failure(kIo, "config " + path + ": expected an object");
  auto flag = [&](const char* name) { return std::find(given.begin(), given.end(), name) != given.end(); };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "sources") {
        if (!flag("sources")) rc.sources = v.get<std::vector<std::string>>();
      } else if (key == "world") {
        if (!flag("world")) rc.world = v.get<std::string>();
      } else if (key == "ticks") {
        if (!flag("ticks")) rc.ticks = v.get<std::int64_t>();
      } else if (key == "engine") {
        if (!flag("engine")) rc.engine = v.get<std::string>();
      } else if (key == "workers") {
        if (!flag("workers")) rc.workers = v.get<int>();
      } else if (key == "seed") {
        if (!flag("seed")) rc.seed = v.get<std::uint64_t>();
      } else if (key == "pinPlan") {
        if (!flag("pin-plan")) rc.pin_plan = v.get<std::string>();
      } else if (key == "dumpStateEvery") {
        if (!flag("dump-state-every")) rc.dump_state_every = v.get<std::int64_t>();
      } else if (key == "dumpDir") {
        if (!flag("dump-dir")) rc.dump_dir = v.get<std::string>();
      } else if (key == "stateOut") {
        if (!flag("state-out")) rc.state_out = v.get<std::string>();
      } else if (key == "trace") {
        if (!flag("trace")) rc.trace = v.get<std::string>();
      } else if (key == "traceEffects") {
        if (!flag("trace-effects")) rc.trace_effects = v.get<bool>();
      } else if (key == "traceClasses") {
        if (!flag("trace-classes")) rc.trace_classes = v.get<std::vector<std::string>>();
      } else if (key == "checkpointOnExit") {
        if (!flag("checkpoint-on-exit")) rc.checkpoint_on_exit = v.get<std::string>();
      } else if (key == "restore") {
        if (!flag("restore")) rc.restore = v.get<std::string>();
      } else if (key == "host") {
        if (!flag("host")) rc.host = v.get<std::string>();
      } else if (key == "port") {
        if (!flag("port")) rc.port = v.get<int>();
      } else if (key == "optimizer") {
        rc.optimizer.deviation_ratio = v.value("deviationRatio", rc.optimizer.deviation_ratio);
        rc.optimizer.hysteresis_ticks = v.value("hysteresisTicks", rc.optimizer.hysteresis_ticks);
        rc.optimizer.decay = v.value("decay", rc.optimizer.decay);
        if (!flag("pin-plan")) rc.pin_plan = v.value("pinned", rc.pin_plan);
      } else if (key == "physics") {
        rc.physics.clear();
        for (const auto& p : v) {
          PhysicsConfig pc;
          pc.cls = p.at("class").get<std::string>();
          pc.x = p.value("x", pc.x);
          pc.y = p.value("y", pc.y);
          pc.vx = p.value("vx", pc.vx);
          pc.vy = p.value("vy", pc.vy);
          pc.min_x = p.value("minX", pc.min_x);
          pc.min_y = p.value("minY", pc.min_y);
          pc.max_x = p.value("maxX", pc.max_x);
          pc.max_y = p.value("maxY", pc.max_y);
          rc.physics.push_back(std::move(pc));
        }
      } else {
        throw Failure(kIo, "config " + path + ": unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Failure(kIo, "config " + path + ": " + e.what());
  }
}

}  // namespace sgl::cli
