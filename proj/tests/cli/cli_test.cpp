#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gen.hpp"
#include "httplib.h"
#include "json.hpp"
#include "sgl/program.hpp"
#include "sgl/store.hpp"

extern char** environ;

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kBin = SGL_BIN;
const fs::path kSamples = SGL_SAMPLES;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

/// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int n = 0;
    dir = fs::temp_directory_path() / ("sgl_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Result run_sgl(const std::vector<std::string>& args) {
  Scratch s;
  std::string cmd = quote(kBin);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote(s / "out") + " 2>" + quote(s / "err");
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(s / "out"), slurp(s / "err")};
}

std::string sample(const std::string& name) { return (kSamples / name).string(); }

/// A background `sgl debug` process with its stdout on a pipe.
struct DebugProcess {
  pid_t pid = -1;
  FILE* out = nullptr;
  int port = -1;

  explicit DebugProcess(std::vector<std::string> args) {
    int fds[2];
    REQUIRE(::pipe(fds) == 0);
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, fds[1], 1);
    posix_spawn_file_actions_addclose(&fa, fds[0]);
    args.insert(args.begin(), {kBin, "debug"});
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    REQUIRE(posix_spawn(&pid, kBin.c_str(), &fa, nullptr, argv.data(), environ) == 0);
    posix_spawn_file_actions_destroy(&fa);
    ::close(fds[1]);
    out = ::fdopen(fds[0], "r");
  }

  /// Port from the "listening on" line, or -1 when the process exited first.
  int wait_listening() {
    char line[256];
    if (!std::fgets(line, sizeof line, out)) return -1;
    std::string s(line);
    auto colon = s.rfind(':');
    port = std::stoi(s.substr(colon + 1));
    return port;
  }

  int finish() {
    int status = 0;
    ::waitpid(pid, &status, 0);
    pid = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  ~DebugProcess() {
    if (pid > 0) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
    }
    if (out) std::fclose(out);
  }
};

std::string write_case(const Scratch& s, const sgl::testing::GeneratedCase& g) {
  spit(s / "prog.sgl", g.source);
  spit(s / "world.json", g.world);
  return s / "prog.sgl";
}

}  // namespace

TEST_CASE("compile: class and accum-loop sources give a join and aggregate plan") {
  auto r = run_sgl({"compile", sample("unit.sgl"), sample("count.sgl"), "--emit-plan", "-"});
  CHECK(r.code == 0);
  json plan = json::parse(r.out);
  REQUIRE(plan.contains("Unit"));
  std::string text = plan.dump();
  CHECK(text.find("\"GroupAggregate\"") != std::string::npos);
  CHECK(text.find("\"ThetaJoin\"") != std::string::npos);
}

TEST_CASE("compile: emitted plan is stable across runs") {
  auto a = run_sgl({"compile", sample("unit.sgl"), sample("count.sgl"), "--emit-plan", "-"});
  auto b = run_sgl({"compile", sample("unit.sgl"), sample("count.sgl"), "--emit-plan", "-"});
  CHECK(a.out == b.out);
}

TEST_CASE("compile: schema map") {
  auto r = run_sgl({"compile", sample("unit.sgl"), sample("count.sgl"), "--emit-schema", "-"});
  CHECK(r.code == 0);
  json s = json::parse(r.out);
  bool found = false;
  for (const auto& f : s["fields"]) found |= f["class"] == "Unit" && f["field"] == "damage";
  CHECK(found);
}

TEST_CASE("compile: an effect read is a diagnostic") {
  auto r = run_sgl({"compile", sample("effect_read.sgl")});
  CHECK(r.code == 1);
  CHECK(r.err.find("E_READ_EFFECT") != std::string::npos);
  CHECK(r.err.find("effect_read.sgl:9") != std::string::npos);
}

TEST_CASE("compile: diagnostics point into the right file") {
  Scratch s;
  spit(s / "b.sgl", "run count(this: Unit) {\n  seen <- nosuch;\n}\n");
  auto r = run_sgl({"compile", sample("unit.sgl"), s / "b.sgl"});
  CHECK(r.code == 1);
  CHECK(r.err.find("b.sgl:2") != std::string::npos);
}

TEST_CASE("compile: missing file is an I/O error") {
  CHECK(run_sgl({"compile", "/nonexistent/x.sgl"}).code == 2);
}

TEST_CASE("run: both engines produce identical dumps") {
  for (std::uint64_t seed : {3u, 11u, 19u}) {
    Scratch s;
    std::string prog = write_case(s, sgl::testing::random_case(seed, 80));
    auto rel = run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "15", "--seed", "5", "--state-out",
                    s / "rel.json"});
    auto ref = run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "15", "--seed", "5", "--engine", "reference",
                    "--state-out", s / "ref.json"});
    CHECK(rel.code == 0);
    CHECK(ref.code == 0);
    CHECK(slurp(s / "rel.json") == slurp(s / "ref.json"));
    CHECK(rel.err.find("ticks/sec") != std::string::npos);
  }
}

TEST_CASE("run: worker count does not change the dump") {
  Scratch s;
  std::string prog = write_case(s, sgl::testing::random_case(23, 150));
  run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "12", "--state-out", s / "w1.json"});
  run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "12", "--workers", "4", "--state-out", s / "w4.json"});
  CHECK(!slurp(s / "w1.json").empty());
  CHECK(slurp(s / "w1.json") == slurp(s / "w4.json"));
}

TEST_CASE("run: zero ticks leaves the world unchanged") {
  Scratch s;
  auto r = run_sgl({"run", sample("shop.sgl"), "--world", sample("shop_world.json"), "--ticks", "0", "--state-out",
                s / "out.json"});
  CHECK(r.code == 0);
  auto prog = sgl::compile_program(slurp(sample("shop.sgl")));
  auto snap = sgl::load_world(prog, slurp(sample("shop_world.json")));
  CHECK(slurp(s / "out.json") == sgl::dump_world(prog, *snap));
}

TEST_CASE("run: state dumps reload as worlds") {
  Scratch s;
  auto r = run_sgl({"run", sample("quest.sgl"), "--world", sample("quest_world.json"), "--ticks", "5",
                "--dump-state-every", "2", "--dump-dir", s / "dumps"});
  CHECK(r.code == 0);
  for (int t : {0, 2, 4}) CHECK(fs::exists(s / ("dumps/state-" + std::to_string(t) + ".json")));
  CHECK(!fs::exists(s / "dumps/state-1.json"));
  auto prog = sgl::compile_program(slurp(sample("quest.sgl")));
  auto snap = sgl::load_world(prog, slurp(s / "dumps/state-4.json"));
  CHECK(snap->object_count() == 3);
}

TEST_CASE("run: checkpoint on exit then resume matches a straight run") {
  Scratch s;
  std::string prog = write_case(s, sgl::testing::random_case(31, 60));
  run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "20", "--seed", "7", "--state-out", s / "straight.json"});
  auto a = run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "9", "--seed", "7", "--checkpoint-on-exit",
                s / "ck.json"});
  CHECK(a.code == 0);
  auto b = run_sgl({"run", prog, "--restore", s / "ck.json", "--ticks", "11", "--state-out", s / "resumed.json"});
  CHECK(b.code == 0);
  CHECK(slurp(s / "straight.json") == slurp(s / "resumed.json"));

  spit(s / "bad.json", "{\"format\": \"sgl-checkpoint\"}");
  CHECK(run_sgl({"run", prog, "--restore", s / "bad.json", "--ticks", "1"}).code == 2);
}

TEST_CASE("run: config file sits under explicit flags") {
  Scratch s;
  spit(s / "cfg.json", json{{"sources", {sample("duel.sgl")}},
                            {"world", sample("duel_world.json")},
                            {"ticks", 2},
                            {"engine", "reference"},
                            {"seed", 42}}
                           .dump());
  auto r = run_sgl({"run", "--config", s / "cfg.json", "--ticks", "4", "--trace", s / "trace.ndjson"});
  CHECK(r.code == 0);
  std::istringstream lines(slurp(s / "trace.ndjson"));
  std::string first;
  std::getline(lines, first);
  json header = json::parse(first);
  CHECK(header["kind"] == "header");
  CHECK(header["config"]["ticks"] == 4);
  CHECK(header["config"]["engine"] == "reference");
  CHECK(header["config"]["seed"] == 42);
  int stats = 0;
  for (std::string l; std::getline(lines, l);) stats += json::parse(l)["kind"] == "stats";
  CHECK(stats == 4);

  spit(s / "typo.json", R"({"tciks": 3})");
  CHECK(run_sgl({"run", sample("duel.sgl"), "--world", sample("duel_world.json"), "--config", s / "typo.json"}).code == 2);
}

TEST_CASE("run: the trace header reproduces the run") {
  Scratch s;
  std::string prog = write_case(s, sgl::testing::random_case(41, 60));
  run_sgl({"run", prog, "--world", s / "world.json", "--ticks", "8", "--seed", "77", "--workers", "2", "--trace",
       s / "t.ndjson", "--trace-effects", "--state-out", s / "a.json"});
  std::string first;
  std::ifstream trace(s / "t.ndjson");
  std::getline(trace, first);
  json cfg = json::parse(first)["config"];
  cfg.erase("restore");
  cfg.erase("optimizer");
  cfg.erase("physics");
  cfg["stateOut"] = s / "b.json";
  spit(s / "replay.json", cfg.dump());
  CHECK(run_sgl({"run", "--config", s / "replay.json"}).code == 0);
  CHECK(slurp(s / "a.json") == slurp(s / "b.json"));
  CHECK(slurp(s / "t.ndjson").find("\"effectEntry\"") != std::string::npos);
}

TEST_CASE("run: bad world is a diagnostic, bad flags are usage errors") {
  Scratch s;
  spit(s / "w.json", R"({"objects": [{"class": "Ghost", "id": 1}]})");
  auto r = run_sgl({"run", sample("duel.sgl"), "--world", s / "w.json", "--ticks", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Ghost") != std::string::npos);
  CHECK(run_sgl({"run", sample("duel.sgl"), "--world", sample("duel_world.json"), "--engine", "fast"}).code == 2);
  CHECK(run_sgl({"frobnicate"}).code == 2);
  CHECK(run_sgl({"run", sample("duel.sgl"), "--world", "/nonexistent.json"}).code == 2);
}

TEST_CASE("debug: step three times then state shows tick 3; SIGINT checkpoints") {
  Scratch s;
  DebugProcess p({sample("duel.sgl"), "--world", sample("duel_world.json"), "--port", "0", "--checkpoint-on-exit",
                  s / "exit.json"});
  int port = p.wait_listening();
  REQUIRE(port > 0);
  httplib::Client c("127.0.0.1", port);
  CHECK(c.Get("/")->body.find("<html>") != std::string::npos);
  for (int i = 0; i < 3; ++i) CHECK(c.Post("/step", R"({"ticks": 1})", "application/json")->status == 200);
  json state = json::parse(c.Get("/state/Unit")->body);
  CHECK(state["tick"] == 3);
  ::kill(p.pid, SIGINT);
  CHECK(p.finish() == 0);
  json ck = json::parse(slurp(s / "exit.json"));
  CHECK(ck["tick"] == 3);
}

TEST_CASE("debug: bad world exits 1 before serving") {
  Scratch s;
  spit(s / "w.json", R"({"objects": [{"class": "Unit", "id": 0}]})");
  DebugProcess p({sample("duel.sgl"), "--world", s / "w.json", "--port", "0"});
  CHECK(p.wait_listening() == -1);
  CHECK(p.finish() == 1);
}

TEST_CASE("debug: a taken port exits 2") {
  httplib::Server holder;
  int port = holder.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  DebugProcess p({sample("duel.sgl"), "--world", sample("duel_world.json"), "--port", std::to_string(port)});
  CHECK(p.wait_listening() == -1);
  CHECK(p.finish() == 2);
}

TEST_CASE("bench: smoke at n = 100") {
  Scratch s;
  auto r = run_sgl({"bench", "fig2-count", "--sizes", "100", "--ticks", "3", "--reference-ticks", "2", "--json",
                s / "b.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("speedup") != std::string::npos);
  json b = json::parse(slurp(s / "b.json"));
  REQUIRE(b["rows"].size() == 1);
  CHECK(b["rows"][0]["n"] == 100);
  CHECK(b["rows"][0]["speedup"].get<double>() > 0);
  CHECK(run_sgl({"bench", "nosuch"}).code == 2);
}
