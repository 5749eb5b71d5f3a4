#include "doctest.h"

#include <string>

#include "sgl/format.hpp"
#include "sgl/lowering.hpp"
#include "sgl/parser.hpp"

using namespace sgl;

namespace {

const std::string kDecls = R"(
class Unit {
state:
  number x = 2;
  number y = 3;
  number health = 10;
  ref<Item> i = null;
  ref<Unit> c = null;
  set<ref<Item>> items = {};
effects:
  number moveX : avg;
  number moveY : avg;
  number damage : sum;
  bool fleeing : or;
  set<ref<Item>> itemsAcquired : setUnion;
update:
  health = health - damage;
}
class Item {
state:
  number weight = 1;
}
)";

const std::string kPlan = R"(
run plan(this: Unit) {
  moveX <- x; moveY <- y;
  waitNextTick;
  itemsAcquired <= i;
  waitNextTick;
  c.damage <- 1;
}
)";

}  // namespace

TEST_CASE("move/pickup/attack splits into three segments") {
  Program p = compile_program(kDecls + kPlan);
  auto ls = lower_program(p);
  const auto& u = ls[static_cast<std::size_t>(p.class_index("Unit"))];
  REQUIRE(u.segments.size() == 3);
  CHECK(format_block(u.segments[0]) == "moveX <- x;\nmoveY <- y;\n_pc_next <- 1;\n");
  CHECK(format_block(u.segments[1]) == "itemsAcquired <= i;\n_pc_next <- 2;\n");
  CHECK(format_block(u.segments[2]) == "c.damage <- 1;\n_pc_next <- 0;\n");
  REQUIRE(u.body.size() == 1);
  CHECK(u.body[0]->kind == Stmt::Kind::If);
}

TEST_CASE("a script without waits is its own single segment") {
  Program p = compile_program(kDecls + "run s(this: Unit) { moveX <- x; }");
  auto ls = lower_program(p);
  const auto& u = ls[0];
  REQUIRE(u.segments.size() == 1);
  CHECK(ast_equal(u.body, p.classes[0].body));
}

TEST_CASE("a wait inside one branch moves the continuation into both branches") {
  Program p = compile_program(kDecls + R"(
run s(this: Unit) {
  if (health < 5) {
    moveX <- 0;
    waitNextTick;
    moveX <- 1;
  }
  moveY <- 2;
})");
  auto ls = lower_program(p);
  const auto& u = ls[0];
  REQUIRE(u.segments.size() == 2);
  CHECK(format_block(u.segments[0]) ==
        "if (health < 5) {\n  moveX <- 0;\n  _pc_next <- 1;\n} else {\n  moveY <- 2;\n  _pc_next <- 0;\n}\n");
  CHECK(format_block(u.segments[1]) == "moveX <- 1;\nmoveY <- 2;\n_pc_next <- 0;\n");
}

TEST_CASE("handlers become guarded preludes at entry and after each wait") {
  Program p = compile_program(kDecls + kPlan + "on Unit when (health < 5) { fleeing <- true; }");
  CompilationUnit lowered = lower_handlers(p);
  REQUIRE(lowered.scripts.size() == 1);
  auto manual = parse_source(kDecls + R"(
run plan(this: Unit) {
  if (health < 5) { fleeing <- true; }
  moveX <- x; moveY <- y;
  waitNextTick;
  if (health < 5) { fleeing <- true; }
  itemsAcquired <= i;
  waitNextTick;
  if (health < 5) { fleeing <- true; }
  c.damage <- 1;
})");
  CHECK(ast_equal(lowered.scripts[0].body, manual.scripts[0].body));
  CHECK(lowered.handlers.empty());
}

TEST_CASE("zero handlers leave the script unchanged") {
  Program p = compile_program(kDecls + kPlan);
  CompilationUnit lowered = lower_handlers(p);
  REQUIRE(lowered.scripts.size() == 1);
  CHECK(ast_equal(lowered.scripts[0].body, p.source.scripts[0].body));
}

TEST_CASE("restart handler terminates the segment and emits the reset channel") {
  Program p = compile_program(kDecls + kPlan + "on Unit when (health < 3) restart { }");
  auto ls = lower_program(p);
  const auto& u = ls[0];
  REQUIRE(u.segments.size() == 3);
  CHECK(format_block(u.segments[2]) ==
        "if (health < 3) {\n  _pc_reset <- 0;\n} else {\n  c.damage <- 1;\n  _pc_next <- 0;\n}\n");
}
