#include "doctest.h"

#include <sstream>

#include "harness.hpp"
#include "sgl/trace.hpp"

using namespace sgl;
using namespace sgl::testing;

namespace {

const std::string kCombat = R"(
class Unit {
state:
  number health = 10;
  number x = 0;
effects:
  number damage : sum;
  number vx : avg;
update:
  health = health - damage;
  x = x + vx;
}
class Attacker {
state:
  ref<Unit> target = null;
  number power = 0;
}
run hit(this: Attacker) {
  target.damage <- power;
}
)";

const std::string kCombatWorld = R"({"objects": [
  {"class": "Unit", "id": 1},
  {"class": "Attacker", "id": 2, "fields": {"target": 1, "power": 3}},
  {"class": "Attacker", "id": 3, "fields": {"target": 1, "power": 4}}
]})";

EngineConfig reference() {
  EngineConfig c;
  c.engine = EngineKind::Reference;
  return c;
}

const std::string kShop = R"(
class Bank {
state:
  number account = 5;
effects:
  number spend : sum;
update:
  account = account - spend;
constraints:
  account > 0;
}
class Shopper {
state:
  ref<Bank> bank = null;
}
run buy(this: Shopper) {
  atomic { bank.spend <- 3; }
}
)";

}  // namespace

TEST_CASE("summed damage from two attackers reaches the rule") {
  auto w = make_world(kCombat, kCombatWorld, reference());
  w->run_tick();
  CHECK(num(*w, 1, "health") == 3);
  CHECK(w->tick() == 1);
}

TEST_CASE("absent avg effect leaves the ruled field unchanged") {
  auto w = make_world(kCombat, kCombatWorld, reference());
  w->run_tick();
  CHECK(num(*w, 1, "x") == 0);
}

TEST_CASE("empty world advances only the tick") {
  auto w = make_world(kCombat, R"({"objects": []})", reference());
  auto before = w->snapshot();
  w->run_tick();
  CHECK(w->tick() == before->tick + 1);
  CHECK(w->snapshot()->object_count() == 0);
  CHECK(w->snapshot()->next_id == before->next_id);
}

TEST_CASE("greedy admission: lower txn id wins the last funds") {
  auto w = make_world(kShop, R"({"objects": [
    {"class": "Bank", "id": 1},
    {"class": "Shopper", "id": 2, "fields": {"bank": 1}},
    {"class": "Shopper", "id": 3, "fields": {"bank": 1}}]})",
                      reference());
  auto rep = w->run_tick();
  CHECK(rep.txns_committed == 1);
  CHECK(rep.txns_aborted == 1);
  CHECK(num(*w, 1, "account") == 2);
  CHECK(field(*w, 2, "lastTxnStatus").as_int() == kTxnCommitted);
  CHECK(field(*w, 3, "lastTxnStatus").as_int() == kTxnAborted);
  CHECK(check_constraints(w->program(), *w->snapshot()).empty());
}

TEST_CASE("ordinary rule that would break a constraint freezes the field") {
  auto w = make_world(R"(
class Bank {
state:
  number account = 2;
update:
  account = account - 1;
constraints:
  account > 0;
})",
                      R"({"objects": [{"class": "Bank", "id": 1}]})", reference());
  w->run_tick();
  CHECK(num(*w, 1, "account") == 1);
  w->run_tick();
  CHECK(num(*w, 1, "account") == 1);
  REQUIRE(w->logs().size() == 2);
  CHECK(w->logs().back().frozen == std::vector<ObjectId>{1});
}

TEST_CASE("constraint violated at load rejects the world") {
  auto prog = compile(kShop);
  auto snap = load_world(*prog, R"({"objects": [{"class": "Bank", "id": 1, "fields": {"account": 0}}]})");
  try {
    World w(prog, snap, reference());
    FAIL("expected rejection");
  } catch (const EngineError& e) {
    CHECK(e.code() == "E_CONSTRAINT");
  }
}

TEST_CASE("program counter walks the segments and wraps") {
  auto w = make_world(R"(
class Walker {
state:
  number steps = 0;
effects:
  number step : sum;
update:
  steps = steps + step;
}
run walk(this: Walker) {
  step <- 1;
  waitNextTick;
  step <- 10;
  waitNextTick;
  step <- 100;
})",
                      R"({"objects": [{"class": "Walker", "id": 1}]})", reference());
  std::vector<double> seen;
  std::vector<std::int64_t> pcs;
  for (int i = 0; i < 4; ++i) {
    w->run_tick();
    seen.push_back(num(*w, 1, "steps"));
    pcs.push_back(field(*w, 1, "_pc").as_int());
  }
  CHECK(seen == std::vector<double>{1, 11, 111, 112});
  CHECK(pcs == std::vector<std::int64_t>{1, 2, 0, 1});
}

TEST_CASE("restart handler resets the program counter") {
  auto w = make_world(R"(
class Guard {
state:
  number alarm = 0;
  number log = 0;
effects:
  number note : sum;
update:
  log = log + note;
}
on Guard when (alarm > 0) restart { note <- 1000; }
run patrol(this: Guard) {
  note <- 1;
  waitNextTick;
  note <- 10;
})",
                      R"({"objects": [{"class": "Guard", "id": 1}, {"class": "Guard", "id": 2, "fields": {"alarm": 1}}]})",
                      reference());
  w->run_tick();
  CHECK(num(*w, 1, "log") == 1);
  CHECK(num(*w, 2, "log") == 1000);
  CHECK(field(*w, 2, "_pc").as_int() == 0);
  w->run_tick();
  CHECK(num(*w, 1, "log") == 11);
  CHECK(num(*w, 2, "log") == 2000);
}

TEST_CASE("runtime fault drops only the faulting object's effects") {
  auto w = make_world(R"(
class Unit {
state:
  number d = 1;
  number total = 0;
effects:
  number add : sum;
update:
  total = total + add;
}
run s(this: Unit) {
  add <- 1;
  add <- 1 / d;
})",
                      R"({"objects": [{"class": "Unit", "id": 1, "fields": {"d": 0}}, {"class": "Unit", "id": 2}]})",
                      reference());
  auto rep = w->run_tick();
  CHECK(num(*w, 1, "total") == 0);
  CHECK(num(*w, 2, "total") == 2);
  CHECK(rep.faults == 1);
  REQUIRE(w->logs().back().faults.size() == 1);
  CHECK(w->logs().back().faults[0].source == 1);
}

TEST_CASE("spawns get fresh ids in canonical order and destroy wins") {
  auto w = make_world(R"(
class Egg {
state:
  number size = 1;
  bool hatch = false;
effects:
  number grow : sum;
update:
  size = size + grow;
}
run life(this: Egg) {
  grow <- 1;
  if (hatch) {
    spawn Egg(size: size * 10);
    spawn Egg(size: size * 20);
    destroy this;
  }
})",
                      R"({"objects": [{"class": "Egg", "id": 1, "fields": {"hatch": true, "size": 2}},
                                      {"class": "Egg", "id": 5, "fields": {"size": 3}}]})",
                      reference());
  w->run_tick();
  const auto& eggs = w->snapshot()->classes[0]->ids;
  CHECK(eggs == std::vector<ObjectId>{5, 6, 7});
  CHECK(num(*w, 6, "size") == 20);
  CHECK(num(*w, 7, "size") == 40);
  CHECK(num(*w, 5, "size") == 4);
}

TEST_CASE("physics integrates, displaces later ids and clamps") {
  const std::string src = R"(
class Mover {
state:
  number x = 0;
  number y = 0;
  number dx = 0;
effects:
  number vx : avg;
  number vy : avg;
}
run go(this: Mover) { vx <- dx; vy <- 0; }
)";
  EngineConfig cfg = reference();
  cfg.physics.push_back(PhysicsConfig{"Mover", "x", "y", "vx", "vy", 0, 0, 10, 10});

  SUBCASE("single step") {
    auto w = make_world(src, R"({"objects": [{"class": "Mover", "id": 1, "fields": {"dx": 1}}]})", cfg);
    w->run_tick();
    CHECK(num(*w, 1, "x") == 1);
    CHECK(num(*w, 1, "y") == 0);
  }
  SUBCASE("collision") {
    auto w = make_world(src, R"({"objects": [
      {"class": "Mover", "id": 1, "fields": {"x": 2, "y": 5, "dx": 1}},
      {"class": "Mover", "id": 2, "fields": {"x": 4, "y": 5, "dx": -1}}]})",
                        cfg);
    w->run_tick();
    CHECK(num(*w, 1, "x") == 3);
    CHECK(num(*w, 1, "y") == 5);
    double x2 = num(*w, 2, "x"), y2 = num(*w, 2, "y");
    CHECK(std::max(std::abs(x2 - 3), std::abs(y2 - 5)) == 1);
  }
  SUBCASE("boundary") {
    auto w = make_world(src, R"({"objects": [{"class": "Mover", "id": 1, "fields": {"x": 10, "dx": 3}}]})", cfg);
    w->run_tick();
    CHECK(num(*w, 1, "x") == 10);
  }
}

namespace {
class Claimer final : public UpdateComponent {
 public:
  explicit Claimer(std::string n) : n_(std::move(n)) {}
  std::string name() const override { return n_; }
  std::vector<FieldKey> claims(const Program& p) const override {
    int c = p.class_index("Unit");
    return {{c, p.classes[static_cast<std::size_t>(c)].state_index("health")}};
  }
  void update(const UpdateContext&, std::vector<RowUpdate>&, std::vector<FaultRecord>&) const override {}

 private:
  std::string n_;
};
}  // namespace

TEST_CASE("two components claiming one field are rejected") {
  auto w = make_world(kCombat, kCombatWorld, reference());
  w->register_update_component(std::make_shared<Claimer>("a"));
  try {
    w->register_update_component(std::make_shared<Claimer>("b"));
    FAIL("expected E_UNPARTITIONED_STATE");
  } catch (const EngineError& e) {
    CHECK(e.code() == "E_UNPARTITIONED_STATE");
  }
}

TEST_CASE("effect provenance per object with reduced value") {
  EngineConfig cfg = reference();
  cfg.trace.effects = true;
  auto w = make_world(kCombat, kCombatWorld, cfg);
  w->run_tick();
  const TickLog* log = w->log_for(0);
  REQUIRE(log != nullptr);
  auto views = effects_of(w->program(), *log, 1);
  REQUIRE(views.size() == 1);
  REQUIRE(views[0].entries.size() == 2);
  CHECK(views[0].entries[0].source == 2);
  CHECK(views[0].entries[1].source == 3);
  CHECK(views[0].reduced.as_number() == 7);
  CHECK(effects_of(w->program(), *log, 2).empty());

  std::ostringstream os;
  write_ndjson(w->program(), *log, os);
  CHECK(os.str().find("\"kind\":\"effectEntry\"") != std::string::npos);
}

TEST_CASE("aborted entries are visible but excluded from the reduced value") {
  EngineConfig cfg = reference();
  cfg.trace.effects = true;
  auto w = make_world(kShop, R"({"objects": [
    {"class": "Bank", "id": 1},
    {"class": "Shopper", "id": 2, "fields": {"bank": 1}},
    {"class": "Shopper", "id": 3, "fields": {"bank": 1}}]})",
                      cfg);
  w->run_tick();
  auto views = effects_of(w->program(), *w->log_for(0), 1);
  REQUIRE(views.size() == 1);
  REQUIRE(views[0].entries.size() == 2);
  CHECK(views[0].aborted[0] == false);
  CHECK(views[0].aborted[1] == true);
  CHECK(views[0].reduced.as_number() == 3);
}
