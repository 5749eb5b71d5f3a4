#include "doctest.h"

#include <thread>

#include "harness.hpp"
#include "httplib.h"
#include "json.hpp"
#include "sgl/debug_server.hpp"
#include "sgl/scenarios.hpp"
#include "sgl/schema.hpp"

using namespace sgl;
using namespace sgl::testing;
using nlohmann::json;

namespace {

const std::string kDuel = R"(
class Unit {
state:
  number health = 10;
  number hit = 0;
  ref<Unit> target = null;
effects:
  number damage : sum;
update:
  health = health - damage;
}
run attack(this: Unit) {
  if (target != null) { target.damage <- hit; }
}
)";

const std::string kDuelWorld = R"({"objects": [
  {"class": "Unit", "id": 1, "fields": {}},
  {"class": "Unit", "id": 2, "fields": {"hit": 3, "target": 1}},
  {"class": "Unit", "id": 3, "fields": {"hit": 4, "target": 1}}
]})";

/// A live server on an ephemeral port plus a client bound to it.
struct Session {
  DebugServer server;
  int port;
  std::thread thread;
  httplib::Client client;

  explicit Session(std::unique_ptr<World> w)
      : server(std::move(w)), port(server.bind("127.0.0.1", 0)), thread([this] { server.serve(); }),
        client("127.0.0.1", port) {
    for (int i = 0; i < 200 && !client.Get("/stats"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ~Session() {
    server.stop();
    thread.join();
  }

  std::pair<int, json> get(const std::string& path) {
    auto r = client.Get(path);
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
  std::pair<int, json> post(const std::string& path, const std::string& body = "{}") {
    auto r = client.Post(path, body, "application/json");
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
  std::pair<int, json> del(const std::string& path) {
    auto r = client.Delete(path);
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
};

std::unique_ptr<World> duel() {
  EngineConfig cfg;
  cfg.trace.effects = true;
  return make_world(kDuel, kDuelWorld, cfg);
}

double health_of(const json& state, ObjectId id) {
  for (const auto& r : state["rows"]) {
    if (r["id"] == id) return r["health"];
  }
  FAIL("object missing from state");
  return 0;
}

}  // namespace

TEST_CASE("step advances one tick and state reflects it") {
  Session s(duel());
  auto [code, body] = s.post("/step", R"({"ticks": 1})");
  CHECK(code == 200);
  CHECK(body["tick"] == 1);
  auto [sc, state] = s.get("/state/Unit");
  CHECK(sc == 200);
  CHECK(state["tick"] == 1);
  CHECK(health_of(state, 1) == 3.0);
  CHECK(health_of(state, 2) == 10.0);
}

TEST_CASE("three steps show tick 3 and older ticks stay readable") {
  Session s(duel());
  for (int i = 0; i < 3; ++i) s.post("/step", R"({"ticks": 1})");
  auto [c3, now] = s.get("/state/Unit");
  CHECK(now["tick"] == 3);
  CHECK(health_of(now, 1) == -11.0);
  auto [c1, old] = s.get("/state/Unit?tick=1");
  CHECK(c1 == 200);
  CHECK(old["tick"] == 1);
  CHECK(health_of(old, 1) == 3.0);
  CHECK(s.get("/state/Unit?tick=40").first == 404);
  CHECK(s.get("/state/Unit?tick=x").first == 400);
}

TEST_CASE("schema echoes the derived table map") {
  Session s(duel());
  auto [code, body] = s.get("/schema");
  CHECK(code == 200);
  auto prog = compile(kDuel);
  PhysicalSchema want = derive_schema(*prog);
  CHECK(body["fields"].size() == want.fields.size());
  for (const auto& f : body["fields"]) {
    const auto& ref = want.fields.at({f["class"].get<std::string>(), f["field"].get<std::string>()});
    CHECK(f["table"] == ref.table);
    CHECK(f["column"] == ref.column);
  }
  CHECK(body["tables"].size() == want.tables.size());
}

TEST_CASE("effect view lists both entries and the reduced sum") {
  Session s(duel());
  s.post("/step");
  auto [code, body] = s.get("/effects/1?tick=0");
  CHECK(code == 200);
  CHECK(body["logged"] == true);
  REQUIRE(body["effects"].size() == 1);
  const auto& dmg = body["effects"][0];
  CHECK(dmg["field"] == "damage");
  REQUIRE(dmg["entries"].size() == 2);
  std::vector<std::pair<double, int>> got;
  for (const auto& e : dmg["entries"]) got.emplace_back(e["value"].get<double>(), e["source"].get<int>());
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::pair<double, int>>{{3.0, 2}, {4.0, 3}});
  CHECK(dmg["reduced"] == 7.0);

  CHECK(s.get("/effects/2?tick=0").second["effects"].empty());
  CHECK(s.get("/effects/99?tick=0").second["effects"].empty());
  CHECK(s.get("/effects/1?tick=17").second["effects"].empty());
}

TEST_CASE("aborted transaction entries are flagged and excluded") {
  Scenario sc = make_scenario("shop", 8, 3);
  EngineConfig cfg;
  cfg.trace.effects = true;
  Session s(make_world(sc.source, sc.world, cfg));
  s.post("/step");
  auto [code, body] = s.get("/effects/1?tick=0");
  REQUIRE(body["effects"].size() == 1);
  const auto& sold = body["effects"][0];
  int committed = 0, aborted = 0;
  for (const auto& e : sold["entries"]) (e["aborted"] == true ? aborted : committed)++;
  CHECK(committed == 1);
  CHECK(aborted == 7);
  CHECK(sold["reduced"] == 1);
}

TEST_CASE("breakpoint halts stepping at the first matching boundary") {
  Session s(duel());
  auto [bc, bp] = s.post("/breakpoints", R"({"class": "Unit", "cond": "health < 0"})");
  CHECK(bc == 200);
  int id = bp["id"];
  auto [code, body] = s.post("/step", R"({"ticks": 10})");
  CHECK(code == 200);
  CHECK(body["tick"] == 2);
  CHECK(body["halted"]["breakpoint"] == id);
  CHECK(body["halted"]["ids"] == json::array({1}));

  CHECK(s.get("/breakpoints").second["breakpoints"].size() == 1);
  CHECK(s.del("/breakpoints/" + std::to_string(id)).first == 200);
  CHECK(s.del("/breakpoints/" + std::to_string(id)).first == 404);
  CHECK(s.post("/step", R"({"ticks": 3})").second["tick"] == 5);
}

TEST_CASE("run until a breakpoint or a tick") {
  Session s(duel());
  s.post("/breakpoints", R"({"class": "Unit", "cond": "health < -20"})");
  auto [code, body] = s.post("/run", R"({"untilBreakpoint": true, "wait": true})");
  CHECK(code == 200);
  CHECK(body["tick"] == 5);
  CHECK(body["halted"]["reason"] == "breakpoint");
  CHECK(s.get("/stats").second["running"] == false);

  auto [c2, b2] = s.post("/run", R"({"untilTick": 9, "wait": true})");
  CHECK(b2["halted"]["reason"] == "breakpoint");
  CHECK(b2["tick"] == 6);

  s.del("/breakpoints/1");
  CHECK(s.post("/run", R"({"untilTick": 9, "wait": true})").second["tick"] == 9);
  CHECK(s.post("/run", "{}").first == 400);
}

TEST_CASE("pause stops a background run") {
  Session s(duel());
  auto [code, body] = s.post("/run", R"({"untilBreakpoint": true})");
  CHECK(code == 200);
  CHECK(body["running"] == true);
  CHECK(s.post("/step").first == 409);
  auto [pc, paused] = s.post("/pause");
  CHECK(pc == 200);
  CHECK(paused["running"] == false);
  auto stats = s.get("/stats").second;
  CHECK(stats["running"] == false);
  CHECK(stats["halt"]["reason"] == "pause");
  std::int64_t t = stats["tick"];
  CHECK(s.get("/stats").second["tick"] == t);
}

TEST_CASE("malformed requests are rejected") {
  Session s(duel());
  CHECK(s.post("/step", "{nope").first == 400);
  CHECK(s.post("/step", R"({"ticks": -1})").first == 400);
  CHECK(s.post("/breakpoints", R"({"class": "Unit", "cond": "health <"})").first == 400);
  auto [c, b] = s.post("/breakpoints", R"({"class": "Unit", "cond": "mana > 1"})");
  CHECK(c == 400);
  CHECK(b["error"]["code"] == "E_UNKNOWN_NAME");
  CHECK(s.post("/breakpoints", R"({"class": "Unit", "cond": "damage > 1"})").first == 400);
  CHECK(s.post("/breakpoints", R"({"class": "Ghost", "cond": "true"})").first == 404);
  CHECK(s.get("/state/Ghost").first == 404);
  CHECK(s.get("/object/77").first == 404);
  CHECK(s.get("/plan?class=Ghost").first == 404);
  CHECK(s.post("/restore", R"({"checkpoint": {"format": "other"}})").first == 400);
}

TEST_CASE("GET requests never change the world") {
  Session s(duel());
  s.post("/step", R"({"ticks": 2})");
  std::string before = s.server.checkpoint();
  for (const char* path : {"/schema", "/state/Unit", "/state/Unit?tick=1", "/object/1", "/effects/1", "/plan",
                           "/plan?class=Unit", "/stats", "/breakpoints", "/"}) {
    CHECK(s.client.Get(path)->status == 200);
  }
  CHECK(s.server.checkpoint() == before);
}

TEST_CASE("object, plan and stats") {
  Session s(duel());
  s.post("/step");
  auto [oc, obj] = s.get("/object/1");
  CHECK(oc == 200);
  CHECK(obj["class"] == "Unit");
  CHECK(obj["fields"]["health"] == 3.0);

  auto [pc, plan] = s.get("/plan?class=Unit");
  CHECK(pc == 200);
  CHECK(plan["engine"] == "relational");
  CHECK(plan["plan"].is_object());

  auto stats = s.get("/stats").second;
  CHECK(stats["tick"] == 1);
  CHECK(stats["objects"] == 3);
  CHECK(stats["lastTick"]["entries"] == 2);

  auto r = s.client.Get("/");
  CHECK(r->status == 200);
  CHECK(r->body.find("<html>") != std::string::npos);
}

TEST_CASE("full numeric precision in state") {
  EngineConfig cfg;
  Session s(make_world(kDuel, R"({"objects": [{"class": "Unit", "id": 1, "fields": {"health": 0.1}}]})", cfg));
  auto r = s.client.Get("/state/Unit");
  CHECK(json::parse(r->body)["rows"][0]["health"].get<double>() == 0.1);
  CHECK(r->body.find("0.1") != std::string::npos);
}

TEST_CASE("checkpoint and restore through the API") {
  Session s(duel());
  s.post("/step");
  auto [cc, cp] = s.post("/checkpoint");
  CHECK(cc == 200);
  CHECK(cp["tick"] == 1);
  json saved = cp["checkpoint"];
  auto at1 = s.get("/state/Unit").second;
  s.post("/step", R"({"ticks": 4})");
  auto [rc, rb] = s.post("/restore", json{{"checkpoint", saved}}.dump());
  CHECK(rc == 200);
  CHECK(rb["tick"] == 1);
  CHECK(s.get("/state/Unit").second == at1);
}

TEST_CASE("port already in use is reported") {
  DebugServer a(duel());
  int port = a.bind("127.0.0.1", 0);
  DebugServer b(duel());
  CHECK_THROWS_AS(b.bind("127.0.0.1", port), EngineError);
}
