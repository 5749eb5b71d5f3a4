#include "sgl/debug_server.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json_util.hpp"
#include "sgl/checkpoint.hpp"
#include "sgl/diagnostics.hpp"
#include "sgl/exec.hpp"
#include "sgl/rule_eval.hpp"
#include "sgl/schema.hpp"

namespace sgl {

const char* const kInspectorPlaceholder = R"(<!doctype html>
<html>
<head><meta charset="utf-8"><title>SGL debugger</title></head>
<body>
<h1>SGL debugger</h1>
<p>The browser inspector is not bundled with this build. The JSON API is live:</p>
<ul>
<li><a href="/schema">/schema</a></li>
<li><a href="/stats">/stats</a></li>
<li><a href="/plan">/plan</a></li>
<li><a href="/breakpoints">/breakpoints</a></li>
</ul>
<p>Advance with <code>POST /step {"ticks": 1}</code>.</p>
</body>
</html>
)";

namespace {

/// Answer of one request: status plus JSON body.
struct Reply {
  int status = 200;
  json body;
};

Reply fail(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}};
}

struct Breakpoint {
  int id = 0;
  int cls = -1;
  std::string cond;
  bool enabled = true;
  ExprPtr expr;
};

std::optional<std::int64_t> int_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string s = req.get_param_value(name);
  std::size_t used = 0;
  std::int64_t v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw json::type_error::create(302, "request body must be a JSON object", nullptr);
  return j;
}

}  // namespace

struct DebugServer::Impl {
  std::unique_ptr<World> world;
  httplib::Server http;
  int port = -1;

  // Command queue: requests run on the engine thread, one at a time.
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::function<void()>> queue;
  bool quit = false;
  std::thread engine;

  // Engine-thread state.
  std::vector<Breakpoint> breakpoints;
  int next_bp = 1;
  bool running = false;
  std::optional<std::int64_t> until_tick;
  json halt;  // why the last step or run stopped
  std::vector<std::promise<json>> run_waiters;
  TickReport last;

  explicit Impl(std::unique_ptr<World> w) : world(std::move(w)) {
    // No SO_REUSEPORT: a second server on a taken port must fail to bind.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    engine = std::thread([this] { loop(); });
    routes();
  }

  ~Impl() {
    {
      std::lock_guard lk(mu);
      quit = true;
    }
    cv.notify_all();
    engine.join();
  }

  void loop() {
    for (;;) {
      std::function<void()> cmd;
      {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return quit || !queue.empty() || running; });
        if (quit) break;
        if (!queue.empty()) {
          cmd = std::move(queue.front());
          queue.pop_front();
        }
      }
      if (cmd) {
        cmd();
      } else if (running) {
        run_one();
      }
    }
    finish_run(json{{"reason", "shutdown"}, {"tick", world->tick()}});
  }

  /// Runs `fn` on the engine thread and waits for its answer.
  template <class Fn>
  auto call(Fn fn) -> decltype(fn()) {
    using R = decltype(fn());
    auto task = std::make_shared<std::packaged_task<R()>>(std::move(fn));
    auto fut = task->get_future();
    {
      std::lock_guard lk(mu);
      if (quit) throw EngineError("E_SHUTDOWN", "debug session is closing");
      queue.emplace_back([task] { (*task)(); });
    }
    cv.notify_all();
    return fut.get();
  }

  // ---- engine-thread helpers ----

  int find_class(const std::string& name) const { return world->program().class_index(name); }

  /// Halting breakpoint and matching ids at the current boundary, if any.
  std::optional<json> check_breakpoints() const {
    const Tables& snap = *world->snapshot();
    for (const auto& bp : breakpoints) {
      if (!bp.enabled) continue;
      const ClassTable& t = *snap.classes[static_cast<std::size_t>(bp.cls)];
      json ids = json::array();
      auto no_effects = [](int) { return Value{}; };
      for (ObjectId id : t.ids) {
        ObjectEnv<decltype(no_effects), decltype(no_post())> env{snap, id, bp.cls, snap.tick, no_effects, no_post()};
        bool hit = false;
        try {
          hit = eval_bool(*bp.expr, env);
        } catch (const Fault&) {
        }
        if (hit) ids.push_back(id);
      }
      if (!ids.empty()) {
        return json{{"reason", "breakpoint"},
                    {"breakpoint", bp.id},
                    {"class", world->program().classes[static_cast<std::size_t>(bp.cls)].name},
                    {"cond", bp.cond},
                    {"tick", snap.tick},
                    {"ids", std::move(ids)}};
      }
    }
    return std::nullopt;
  }

  /// One tick; returns the halt record when a breakpoint fires.
  std::optional<json> advance() {
    last = world->run_tick();
    return check_breakpoints();
  }

  void finish_run(json why) {
    running = false;
    until_tick.reset();
    halt = why;
    for (auto& p : run_waiters) p.set_value(why);
    run_waiters.clear();
  }

  void run_one() {
    if (until_tick && world->tick() >= *until_tick) {
      finish_run(json{{"reason", "untilTick"}, {"tick", world->tick()}});
      return;
    }
    try {
      if (auto hit = advance()) {
        finish_run(*hit);
        return;
      }
    } catch (const EngineError& e) {
      finish_run(json{{"reason", "error"}, {"tick", world->tick()}, {"code", e.code()}, {"message", e.what()}});
      return;
    }
    if (until_tick && world->tick() >= *until_tick) {
      finish_run(json{{"reason", "untilTick"}, {"tick", world->tick()}});
    }
  }

  json row_json(const ClassTable& t, std::size_t row) const {
    const auto& ci = world->program().classes[static_cast<std::size_t>(t.cls)];
    json o{{"id", t.ids[row]}};
    for (std::size_t f = 0; f < ci.state.size(); ++f) o[ci.state[f].name] = value_to_json(t.get(row, static_cast<int>(f)));
    return o;
  }

  Snapshot snapshot_param(const httplib::Request& req) const {
    auto t = int_param(req, "tick");
    if (!t || *t == world->tick()) return world->snapshot();
    return world->snapshot_at(*t);
  }

  // ---- handlers (engine thread) ----

  Reply schema() const {
    PhysicalSchema s = derive_schema(world->program());
    json tables = json::array();
    for (const auto& t : s.tables) {
      static const char* kinds[] = {"state", "effect", "stateSet", "effectSet"};
      json cols = json::array();
      for (const auto& [n, ty] : t.columns) cols.push_back({{"name", n}, {"type", ty.str()}});
      tables.push_back({{"name", t.name}, {"kind", kinds[static_cast<int>(t.kind)]}, {"columns", std::move(cols)}});
    }
    json fields = json::array();
    for (const auto& [key, ref] : s.fields) {
      fields.push_back({{"class", key.first}, {"field", key.second}, {"table", ref.table}, {"column", ref.column}});
    }
    return {200, json{{"tables", std::move(tables)}, {"fields", std::move(fields)}}};
  }

  Reply state(const std::string& cls_name, const httplib::Request& req) const {
    int cls = find_class(cls_name);
    if (cls < 0) return fail(404, "E_UNKNOWN_CLASS", "unknown class '" + cls_name + "'");
    Snapshot snap = snapshot_param(req);
    if (!snap) return fail(404, "E_UNKNOWN_TICK", "tick is not retained");
    const auto& ci = world->program().classes[static_cast<std::size_t>(cls)];
    const ClassTable& t = *snap->classes[static_cast<std::size_t>(cls)];
    json names = json::array();
    for (const auto& f : ci.state) names.push_back(f.name);
    json rows = json::array();
    for (std::size_t r = 0; r < t.size(); ++r) rows.push_back(row_json(t, r));
    return {200, json{{"class", ci.name}, {"tick", snap->tick}, {"fields", std::move(names)}, {"rows", std::move(rows)}}};
  }

  Reply object(ObjectId id) const {
    const Tables& snap = *world->snapshot();
    auto loc = snap.locate(id);
    if (!loc) return fail(404, "E_UNKNOWN_OBJECT", "no live object " + std::to_string(id));
    const ClassTable& t = *snap.classes[static_cast<std::size_t>(loc->first)];
    json o = row_json(t, loc->second);
    return {200, json{{"id", id},
                      {"class", world->program().classes[static_cast<std::size_t>(loc->first)].name},
                      {"tick", snap.tick},
                      {"fields", std::move(o)}}};
  }

  Reply effects(ObjectId id, const httplib::Request& req) const {
    std::int64_t t = int_param(req, "tick").value_or(world->tick() - 1);
    const Program& prog = world->program();
    json out = json::array();
    const TickLog* log = world->log_for(t);
    if (log) {
      for (const auto& v : effects_of(prog, *log, id)) {
        const auto& ci = prog.classes[static_cast<std::size_t>(v.cls)];
        json entries = json::array();
        for (std::size_t i = 0; i < v.entries.size(); ++i) {
          const auto& e = v.entries[i];
          json je{{"value", value_to_json(e.value)}, {"source", e.source}, {"stmt", e.stmt}, {"aborted", bool(v.aborted[i])}};
          if (e.txn_site >= 0) je["txn"] = {{"issuer", e.source}, {"site", e.txn_site}};
          entries.push_back(std::move(je));
        }
        out.push_back({{"class", ci.name},
                       {"field", ci.effects[static_cast<std::size_t>(v.field)].name},
                       {"entries", std::move(entries)},
                       {"reduced", v.reduced.is_absent() ? json(nullptr) : value_to_json(v.reduced)}});
      }
    }
    return {200, json{{"id", id}, {"tick", t}, {"logged", log && log->effects_logged}, {"effects", std::move(out)}}};
  }

  Reply plan(const httplib::Request& req) const {
    const Program& prog = world->program();
    auto* rel = dynamic_cast<const RelationalEngine*>(&world->engine());
    auto one = [&](int cls) -> json {
      if (!rel || !rel->plans(cls)) return nullptr;
      return json::parse(rel->plan_json(cls));
    };
    json body{{"engine", rel ? "relational" : "reference"}, {"tick", world->tick()}};
    if (req.has_param("class")) {
      std::string name = req.get_param_value("class");
      int cls = find_class(name);
      if (cls < 0) return fail(404, "E_UNKNOWN_CLASS", "unknown class '" + name + "'");
      body["class"] = prog.classes[static_cast<std::size_t>(cls)].name;
      body["plan"] = one(cls);
    } else {
      json all = json::object();
      for (const auto& ci : prog.classes) all[ci.name] = one(ci.index);
      body["plans"] = std::move(all);
    }
    return {200, body};
  }

  Reply stats() const {
    const Tables& snap = *world->snapshot();
    const Program& prog = world->program();
    const EngineConfig& cfg = world->config();
    auto* rel = dynamic_cast<const RelationalEngine*>(&world->engine());
    json counts = json::object();
    for (const auto& ci : prog.classes) counts[ci.name] = snap.classes[static_cast<std::size_t>(ci.index)]->size();
    json switches = json::array();
    for (const auto& log : world->logs()) {
      for (const auto& s : log.plan_switches) switches.push_back({{"tick", log.tick}, {"note", s}});
    }
    return {200, json{{"tick", snap.tick},
                      {"running", running},
                      {"halt", halt},
                      {"engine", rel ? "relational" : "reference"},
                      {"workers", cfg.workers},
                      {"seed", cfg.seed},
                      {"objects", snap.object_count()},
                      {"classes", std::move(counts)},
                      {"txns", {{"committed", world->txns_committed_total()}, {"aborted", world->txns_aborted_total()}}},
                      {"lastTick",
                       {{"tick", last.tick},
                        {"entries", last.entries},
                        {"faults", last.faults},
                        {"txnsCommitted", last.txns_committed},
                        {"txnsAborted", last.txns_aborted},
                        {"spawned", last.spawned},
                        {"destroyed", last.destroyed},
                        {"effectMs", last.effect_ms},
                        {"updateMs", last.update_ms}}},
                      {"planSwitches", std::move(switches)},
                      {"indexRebuilds", rel ? rel->index_rebuilds() : 0}}};
  }

  json breakpoint_json(const Breakpoint& bp) const {
    return {{"id", bp.id},
            {"class", world->program().classes[static_cast<std::size_t>(bp.cls)].name},
            {"cond", bp.cond},
            {"enabled", bp.enabled}};
  }

  Reply list_breakpoints() const {
    json out = json::array();
    for (const auto& bp : breakpoints) out.push_back(breakpoint_json(bp));
    return {200, json{{"breakpoints", std::move(out)}}};
  }

  Reply add_breakpoint(const json& body) {
    if (!body.contains("class") || !body["class"].is_string() || !body.contains("cond") || !body["cond"].is_string()) {
      return fail(400, "E_REQUEST", "expected {\"class\": string, \"cond\": string}");
    }
    Breakpoint bp;
    std::string name = body["class"];
    bp.cls = find_class(name);
    if (bp.cls < 0) return fail(404, "E_UNKNOWN_CLASS", "unknown class '" + name + "'");
    bp.cond = body["cond"];
    bp.enabled = body.value("enabled", true);
    try {
      bp.expr = analyze_condition(world->program(), bp.cls, bp.cond);
    } catch (const CompileError& e) {
      const auto& d = e.diagnostics().front();
      return fail(400, d.code, d.message);
    }
    bp.id = next_bp++;
    breakpoints.push_back(bp);
    return {200, breakpoint_json(bp)};
  }

  Reply remove_breakpoint(int id) {
    auto it = std::find_if(breakpoints.begin(), breakpoints.end(), [&](const Breakpoint& b) { return b.id == id; });
    if (it == breakpoints.end()) return fail(404, "E_UNKNOWN_BREAKPOINT", "no breakpoint " + std::to_string(id));
    breakpoints.erase(it);
    return {200, json{{"deleted", id}}};
  }

  Reply step(const json& body) {
    if (running) return fail(409, "E_RUNNING", "a run is in progress; POST /pause first");
    std::int64_t n = body.value("ticks", std::int64_t{1});
    if (n < 0) return fail(400, "E_REQUEST", "ticks must be >= 0");
    json why = nullptr;
    try {
      for (std::int64_t i = 0; i < n; ++i) {
        if (auto hit = advance()) {
          why = *hit;
          break;
        }
      }
    } catch (const EngineError& e) {
      halt = json{{"reason", "error"}, {"tick", world->tick()}, {"code", e.code()}, {"message", e.what()}};
      return {500, json{{"error", {{"code", e.code()}, {"message", e.what()}}}, {"tick", world->tick()}}};
    }
    halt = why.is_null() ? json{{"reason", "step"}, {"tick", world->tick()}} : why;
    return {200, json{{"tick", world->tick()}, {"halted", why}}};
  }

  /// Starts a run; the future resolves when it stops. Enabled breakpoints
  /// halt every run; untilBreakpoint alone has no tick bound.
  std::pair<Reply, std::shared_future<json>> run(const json& body) {
    if (running) return {fail(409, "E_RUNNING", "a run is already in progress"), {}};
    std::optional<std::int64_t> until;
    if (body.contains("untilTick")) until = body["untilTick"].get<std::int64_t>();
    bool bp = body.value("untilBreakpoint", false);
    if (!until && !bp) return {fail(400, "E_REQUEST", "expected untilTick and/or untilBreakpoint"), {}};
    running = true;
    until_tick = until;
    halt = nullptr;
    run_waiters.emplace_back();
    std::shared_future<json> done = run_waiters.back().get_future().share();
    return {{200, json{{"running", true}, {"tick", world->tick()}}}, done};
  }

  Reply pause() {
    if (running) finish_run(json{{"reason", "pause"}, {"tick", world->tick()}});
    return {200, json{{"running", false}, {"tick", world->tick()}}};
  }

  Reply checkpoint(const json& body) {
    std::ostringstream os;
    CheckpointMeta meta = write_checkpoint(*world, os);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(meta.checksum));
    json out{{"tick", meta.tick}, {"checksum", hex}, {"bytes", os.str().size()}};
    if (body.contains("path")) {
      std::string path = body["path"];
      std::ofstream f(path, std::ios::binary);
      f << os.str();
      f.close();
      if (!f) return fail(500, "E_IO", "cannot write " + path);
      out["path"] = path;
    } else {
      out["checkpoint"] = json::parse(os.str());
    }
    return {200, out};
  }

  Reply restore(const json& body) {
    std::string text;
    if (body.contains("checkpoint")) {
      text = body["checkpoint"].is_string() ? body["checkpoint"].get<std::string>() : body["checkpoint"].dump();
    } else if (body.contains("path")) {
      std::string path = body["path"];
      std::ifstream f(path, std::ios::binary);
      if (!f) return fail(404, "E_IO", "cannot read " + path);
      text.assign(std::istreambuf_iterator<char>(f), {});
    } else {
      return fail(400, "E_REQUEST", "expected {\"checkpoint\": ...} or {\"path\": ...}");
    }
    if (running) finish_run(json{{"reason", "restore"}, {"tick", world->tick()}});
    try {
      restore_into(*world, text);
    } catch (const EngineError& e) {
      return fail(400, e.code(), e.what());
    }
    last = TickReport{};
    halt = json{{"reason", "restore"}, {"tick", world->tick()}};
    return {200, json{{"tick", world->tick()}}};
  }

  // ---- HTTP plumbing ----

  static void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  /// Wraps a handler: decoding errors become 400s, engine errors 500s.
  template <class Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, fn(req));
      } catch (const json::exception& e) {
        send(res, fail(400, "E_REQUEST", e.what()));
      } catch (const std::invalid_argument& e) {
        send(res, fail(400, "E_REQUEST", std::string("bad number: ") + e.what()));
      } catch (const std::out_of_range& e) {
        send(res, fail(400, "E_REQUEST", std::string("number out of range: ") + e.what()));
      } catch (const EngineError& e) {
        send(res, fail(e.code() == "E_SHUTDOWN" ? 503 : 500, e.code(), e.what()));
      }
    };
  }

  static ObjectId id_of(const httplib::Request& req) {
    const std::string s = req.matches[1];
    return static_cast<ObjectId>(std::stoull(s));
  }

  void routes() {
    http.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kInspectorPlaceholder, "text/html");
    });
    http.Get("/schema", guarded([this](const httplib::Request&) { return call([this] { return schema(); }); }));
    http.Get(R"(/state/([A-Za-z_][A-Za-z0-9_]*))", guarded([this](const httplib::Request& req) {
               std::string cls = req.matches[1];
               return call([&] { return state(cls, req); });
             }));
    http.Get(R"(/object/(\d+))", guarded([this](const httplib::Request& req) {
               ObjectId id = id_of(req);
               return call([&] { return object(id); });
             }));
    http.Get(R"(/effects/(\d+))", guarded([this](const httplib::Request& req) {
               ObjectId id = id_of(req);
               return call([&] { return effects(id, req); });
             }));
    http.Get("/plan", guarded([this](const httplib::Request& req) { return call([&] { return plan(req); }); }));
    http.Get("/stats", guarded([this](const httplib::Request&) { return call([this] { return stats(); }); }));
    http.Get("/breakpoints",
             guarded([this](const httplib::Request&) { return call([this] { return list_breakpoints(); }); }));
    http.Post("/breakpoints", guarded([this](const httplib::Request& req) {
                json body = parse_body(req);
                return call([&] { return add_breakpoint(body); });
              }));
    http.Delete(R"(/breakpoints/(\d+))", guarded([this](const httplib::Request& req) {
                  int id = std::stoi(std::string(req.matches[1]));
                  return call([&] { return remove_breakpoint(id); });
                }));
    http.Post("/step", guarded([this](const httplib::Request& req) {
                json body = parse_body(req);
                return call([&] { return step(body); });
              }));
    http.Post("/run", guarded([this](const httplib::Request& req) {
                json body = parse_body(req);
                auto [reply, done] = call([&] { return run(body); });
                if (reply.status == 200 && body.value("wait", false)) {
                  json why = done.get();
                  reply.body = json{{"running", false}, {"tick", why.value("tick", std::int64_t{0})}, {"halted", why}};
                }
                return reply;
              }));
    http.Post("/pause", guarded([this](const httplib::Request&) { return call([this] { return pause(); }); }));
    http.Post("/checkpoint", guarded([this](const httplib::Request& req) {
                json body = parse_body(req);
                return call([&] { return checkpoint(body); });
              }));
    http.Post("/restore", guarded([this](const httplib::Request& req) {
                json body = parse_body(req);
                return call([&] { return restore(body); });
              }));
  }
};

DebugServer::DebugServer(std::unique_ptr<World> world) : impl_(std::make_unique<Impl>(std::move(world))) {}

DebugServer::~DebugServer() { stop(); }

int DebugServer::bind(const std::string& host, int port) {
  int got = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (got < 0) throw EngineError("E_IO", "cannot listen on " + host + ":" + std::to_string(port));
  impl_->port = got;
  return got;
}

void DebugServer::serve() {
  if (impl_->port < 0) throw EngineError("E_IO", "serve() before bind()");
  impl_->http.listen_after_bind();
}

void DebugServer::stop() {
  impl_->http.stop();
  try {
    impl_->call([this] { return impl_->pause(); });
  } catch (const EngineError&) {
  }
}

std::string DebugServer::checkpoint() {
  return impl_->call([this] { return checkpoint_text(*impl_->world); });
}

std::int64_t DebugServer::tick() {
  return impl_->call([this] { return impl_->world->tick(); });
}

}  // namespace sgl
