#include "doctest.h"

#include <string>

#include "sgl/program.hpp"

using namespace sgl;

namespace {

const std::string kUnit = R"(
class Unit {
state:
  number player = 0;
  number x = 0;
  number y = 0;
  number health = 0;
  number range = 5;
  set<ref<Item>> items = {};
effects:
  number vx : avg;
  number vy : avg;
  number damage : sum;
  number moveX : avg;
  number moveY : avg;
  set<ref<Item>> itemsAcquired : setUnion;
update:
  health = health - damage;
  items = union(items, itemsAcquired);
}
class Item {
state:
  number weight = 1;
}
)";

std::vector<std::string> codes(const std::string& src, const AnalyzeOptions& opts = {}) {
  std::vector<std::string> out;
  try {
    compile_program(kUnit + src, opts);
  } catch (const CompileError& e) {
    for (const auto& d : e.diagnostics()) out.push_back(d.code);
  }
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& c) {
  for (const auto& x : v) {
    if (x == c) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("reading an effect is rejected at the read") {
  auto c = codes("run s(this: Unit) { damage <- 1; let d = damage; }");
  REQUIRE(c.size() == 1);
  CHECK(c[0] == "E_READ_EFFECT");
}

TEST_CASE("range-count loop analyzes cleanly, with the upper-case extent alias") {
  auto c = codes(R"(
run count(this: Unit) {
  accum number cnt with sum over unit u from UNIT {
    if (u.x >= x - range && u.x <= x + range && u.y >= y - range && u.y <= y + range && u != this) {
      cnt <- 1;
    }
  } in {
    damage <- cnt;
  }
})");
  CHECK(c.empty());
}

TEST_CASE("access discipline codes") {
  CHECK(has(codes("run s(this: Unit) { x <- 1; }"), "E_WRITE_STATE"));
  CHECK(has(codes("run s(this: Unit) { accum number a with sum over Unit u from Unit { let q = a; } in { } }"),
            "E_READ_ACC_IN_BLOCK1"));
  CHECK(has(codes("run s(this: Unit) { accum number a with sum over Unit u from Unit { } in { a <- 1; } }"),
            "E_WRITE_ACC_OUTSIDE_BLOCK1"));
  CHECK(has(codes("run s(this: Unit) { accum number a with sum over Unit u from Unit { waitNextTick; } in { } }"),
            "E_WAIT_IN_ACCUM"));
  CHECK(has(codes("run s(this: Unit) { atomic { waitNextTick; } }"), "E_WAIT_IN_ATOMIC"));
  CHECK(has(codes("on Unit when (health < 5) { waitNextTick; }"), "E_WAIT_IN_HANDLER"));
  CHECK(has(codes("on Unit when (damage > 0) { }"), "E_READ_EFFECT"));
  CHECK(has(codes("run s(this: Unit) { let a = x; waitNextTick; vx <- a; }"), "E_LOCAL_ACROSS_WAIT"));
  CHECK(codes("run s(this: Unit) { waitNextTick; let a = x; vx <- a; }").empty());
  CHECK(has(codes("run s(this: Unit) { if (x > 0) { waitNextTick; } let a = 1; vx <- a; }"), "E_SHADOW") == false);
  CHECK(has(codes("run a(this: Unit) { } run b(this: Unit) { }"), "E_DUP_SCRIPT"));
  CHECK(has(codes("run s(this: Unit) { let x = 1; }"), "E_SHADOW"));
  CHECK(has(codes("run s(this: Unit) { vx <- true; }"), "E_TYPE"));
  CHECK(has(codes("class Bad { state: number q = 1 + 1; }"), "E_NONCONST_INIT"));
}

TEST_CASE("a wait inside one branch kills bindings made before it on the merged path") {
  auto c = codes("run s(this: Unit) { let a = x; if (a > 0) { waitNextTick; } vx <- a; }");
  CHECK(has(c, "E_LOCAL_ACROSS_WAIT"));
}

TEST_CASE("external component claims must not overlap rules or each other") {
  AnalyzeOptions o;
  o.claims.push_back({"physics", "Unit", {"x", "y"}});
  CHECK(codes("", o).empty());
  o.claims.push_back({"other", "Unit", {"x"}});
  CHECK(has(codes("", o), "E_UNPARTITIONED_STATE"));
  AnalyzeOptions r;
  r.claims.push_back({"physics", "Unit", {"health"}});
  CHECK(has(codes("", r), "E_UNPARTITIONED_STATE"));
}

TEST_CASE("synthesized fields and annotations") {
  auto p = compile_program(kUnit + R"(
run plan(this: Unit) {
  moveX <- x; moveY <- y;
  waitNextTick;
  accum ref<Item> pick with max over ref<Item> i from items { pick <- i; } in {
    if (pick != null) { itemsAcquired <= pick; }
  }
  waitNextTick;
  damage <- 1;
})");
  const auto& u = p.cls("Unit");
  CHECK(u.has_script);
  CHECK(u.wait_count == 2);
  CHECK(u.state[static_cast<std::size_t>(u.pc_field)].name == "_pc");
  CHECK(u.effects[static_cast<std::size_t>(u.pc_next_effect)].comb == Combinator::Max);
  CHECK(u.slots[0].kind == SlotInfo::Kind::This);
  const auto& moveX = *u.body[0];
  CHECK(moveX.target_field == u.effect_index("moveX"));
  CHECK(moveX.txn_site == -1);
}

TEST_CASE("constraints mark fields and make feeding effects transactional") {
  auto p = compile_program(R"(
class Player {
state:
  number gold = 10;
effects:
  number spend : sum;
  number tip : sum;
update:
  gold = gold - spend;
constraints:
  gold >= 0;
}
run buy(this: Player) {
  spend <- 1;
  tip <- 1;
  atomic { tip <- 2; }
})");
  const auto& c = p.cls("Player");
  CHECK(c.state[static_cast<std::size_t>(c.state_index("gold"))].constrained);
  CHECK(c.effects[static_cast<std::size_t>(c.effect_index("spend"))].transactional);
  CHECK_FALSE(c.effects[static_cast<std::size_t>(c.effect_index("tip"))].transactional);
  CHECK(c.body[0]->txn_site == c.body[0]->id);
  CHECK(c.body[1]->txn_site == -1);
  CHECK(c.body[2]->body[0]->txn_site == c.body[2]->id);
}
