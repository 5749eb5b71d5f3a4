#include "doctest.h"

#include "harness.hpp"
#include "sgl/exec.hpp"
#include "sgl/interpreter.hpp"
#include "sgl/plan.hpp"
#include "sgl/scenarios.hpp"

using namespace sgl;
using namespace sgl::testing;

namespace {

const std::string kCount = R"(
class Unit {
state:
  number x = 0;
  number y = 0;
  number range = 1;
  number seen = 0;
effects:
  number cnt : sum;
update:
  seen = cnt;
}
run count(this: Unit) {
  accum number c with sum over Unit u from Unit {
    if (u.x >= x - range && u.x <= x + range && u.y >= y - range && u.y <= y + range && u != this) {
      c <- 1;
    }
  } in {
    cnt <- c;
  }
}
)";

const std::string kFour = R"({"objects": [
  {"class": "Unit", "id": 1, "fields": {"x": 0, "y": 0, "range": 2}},
  {"class": "Unit", "id": 2, "fields": {"x": 1, "y": 1}},
  {"class": "Unit", "id": 3, "fields": {"x": 2, "y": 0}},
  {"class": "Unit", "id": 4, "fields": {"x": -2, "y": -2}},
  {"class": "Unit", "id": 5, "fields": {"x": 9, "y": 9, "range": 100}}
]})";

const std::string kMixed = R"(
class Cell {
state:
  number v = 1;
  int n = 0;
  bool hot = false;
  set<ref<Cell>> links = {};
  number acc = 0;
effects:
  number add : sum;
  number low : min;
  int bump : sum;
  set<ref<Cell>> link : setUnion;
update:
  acc = acc + add;
  v = v + bump;
  n = n + bump;
  links = union(links, link);
}
run step(this: Cell) {
  let k = v * 2;
  if (hot) {
    add <- 1 / (v - 3);
    spawn Cell(v: k, hot: false);
  } else {
    bump <- 1;
  }
  accum number s with sum over ref<Cell> c from links {
    s <- c.v;
  } in {
    add <- s;
  }
  accum number m with min over Cell c from Cell {
    if (c.v >= v - 1 && c.v <= v + 1 && c != this) { m <- c.v + random(); }
  } in {
    if (m < 100) { low <- m; link <= this; }
  }
  if (v > 6) { destroy this; }
}
)";

const std::string kMixedWorld = R"({"objects": [
  {"class": "Cell", "id": 1, "fields": {"v": 3, "hot": true}},
  {"class": "Cell", "id": 2, "fields": {"v": 2, "links": [1, 3]}},
  {"class": "Cell", "id": 3, "fields": {"v": 4, "hot": true}},
  {"class": "Cell", "id": 4, "fields": {"v": 5}}
]})";

EngineConfig with(EngineKind k, int workers = 1, std::string pin = "") {
  EngineConfig c;
  c.engine = k;
  c.workers = workers;
  c.seed = 7;
  c.optimizer.pinned = std::move(pin);
  return c;
}

/// Per-tick state equality of two configurations.
bool same_trajectory(const std::string& src, const std::string& world, EngineConfig a, EngineConfig b, int ticks) {
  auto wa = make_world(src, world, a);
  auto wb = make_world(src, world, b);
  for (int t = 0; t < ticks; ++t) {
    wa->run_tick();
    wb->run_tick();
    if (!state_equal(*wa->snapshot(), *wb->snapshot())) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("range count matches a hand count") {
  auto w = make_world(kCount, kFour, with(EngineKind::Relational));
  w->run_tick();
  CHECK(num(*w, 1, "seen") == 3);
  CHECK(num(*w, 2, "seen") == 2);
  CHECK(num(*w, 3, "seen") == 1);
  CHECK(num(*w, 4, "seen") == 0);
  CHECK(num(*w, 5, "seen") == 4);
}

TEST_CASE("range count compiles to an index-eligible theta join") {
  auto prog = compile(kCount);
  auto scripts = lower_program(*prog);
  auto tmpl = compile_to_plan(*prog, scripts[0]);
  REQUIRE(tmpl.joins.size() == 1);
  const auto& j = tmpl.joins[0];
  CHECK(j.extent);
  CHECK(j.index_eligible);
  CHECK(j.dims.size() == 2);
  CHECK(tmpl.nodes[static_cast<std::size_t>(j.join_node)].kind == OpKind::ThetaJoin);
  CHECK(tmpl.nodes[static_cast<std::size_t>(j.index_node)].kind == OpKind::IndexRangeScan);
  CHECK(tmpl.nodes[static_cast<std::size_t>(j.agg_node)].kind == OpKind::GroupAggregate);

  auto set = optimize(*prog, tmpl, {10000});
  REQUIRE(set.plans.size() == 2);
  CHECK(set.plans[0].use_index[0] == 1);
  CHECK(set.plans[1].use_index[0] == 0);
  auto js = plan_to_json(*prog, set, 0);
  CHECK(js.find("IndexRangeScan") != std::string::npos);
}

TEST_CASE("script without loops has no joins") {
  auto prog = compile(R"(
class A { state: number x = 0; effects: number d : sum; update: x = x + d; }
run s(this: A) { d <- 1; })");
  auto tmpl = compile_to_plan(*prog, lower_program(*prog)[0]);
  CHECK(tmpl.joins.empty());
}

TEST_CASE("relational trajectory equals the interpreter's") {
  CHECK(same_trajectory(kCount, kFour, with(EngineKind::Reference), with(EngineKind::Relational), 3));
  CHECK(same_trajectory(kMixed, kMixedWorld, with(EngineKind::Reference), with(EngineKind::Relational), 6));
}

TEST_CASE("worker count does not change the trajectory") {
  for (int w : {2, 3, 8}) {
    CHECK(same_trajectory(kMixed, kMixedWorld, with(EngineKind::Relational, 1), with(EngineKind::Relational, w), 6));
  }
}

TEST_CASE("index and scan plans agree") {
  CHECK(same_trajectory(kCount, kFour, with(EngineKind::Relational, 1, "uniform"),
                        with(EngineKind::Relational, 1, "clustered"), 3));
}

TEST_CASE("faults drop the same sources in both engines") {
  auto prog = compile(kMixed);
  Snapshot snap = load_world(*prog, kMixedWorld);
  auto scripts = lower_program(*prog);
  std::vector<std::string> notes;
  ReferenceInterpreter ref(*prog, scripts, false);
  RelationalEngine rel(*prog, scripts, with(EngineKind::Relational));
  auto a = ref.run(snap, 7, notes);
  auto b = rel.run(snap, 7, notes);
  for (auto* buf : {&a, &b}) {
    buf->canonicalize();
    buf->drop_faulted();
  }
  REQUIRE(a.faults.size() == 1);
  CHECK(a.faults[0].source == 1);
  CHECK(buffers_identical(a, b));
}

TEST_CASE("engine state round-trips") {
  auto w = make_world(kCount, kFour, with(EngineKind::Relational));
  w->run_tick();
  auto s = w->engine().save_state();
  RelationalEngine other(w->program(), w->lowered(), w->config());
  other.load_state(s);
  std::vector<std::string> notes;
  other.run(w->snapshot(), 7, notes);
  CHECK(other.save_state().find("\"Unit:") != std::string::npos);
}

TEST_CASE("stationary workload keeps its plan for 1000 ticks") {
  Scenario sc = make_scenario("fig2-count", 400, 12);
  auto w = make_world(sc.source, sc.world);
  auto& rel = dynamic_cast<RelationalEngine&>(w->engine());
  w->run_tick();
  const ClassPlanState* cp = rel.plans(0);
  REQUIRE(cp != nullptr);
  std::string first = cp->set.plans[static_cast<std::size_t>(cp->active)].id;
  for (int t = 1; t < 1000; ++t) {
    w->run_tick();
    REQUIRE(cp->set.plans[static_cast<std::size_t>(cp->active)].id == first);
  }
  CHECK(cp->switched_at == -1);
  CHECK(cp->misses == 0);
}
