#include "doctest.h"

#include "sgl/format.hpp"
#include "sgl/lexer.hpp"
#include "sgl/parser.hpp"

using namespace sgl;

namespace {

const char* kUnitClass = R"(
class Unit {
state:
  number player = 0;
  number x = 0;
  number y = 0;
  number health = 0;
  number range = 5;
effects:
  number vx : avg;
  number vy : avg;
  number damage : sum;
}
)";

const char* kCountScript = R"(
run count(this: Unit) {
  accum number cnt with sum over Unit u from Unit {
    if (u.x >= x - range && u.x <= x + range && u.y >= y - range && u.y <= y + range && u != this) {
      cnt <- 1;
    }
  } in {
    damage <- cnt;
  }
}
)";

std::string code_of(const std::string& src) {
  try {
    parse_source(src);
  } catch (const CompileError& e) {
    return e.diagnostics().front().code;
  }
  return "";
}

}  // namespace

TEST_CASE("lexer keeps leading trivia for round-trip") {
  auto toks = tokenize("  // hi\nx <- 1;");
  REQUIRE(toks.size() == 5);
  CHECK(toks[0].leading == "  // hi\n");
  CHECK(toks[1].kind == TokenKind::EffectAssign);
  std::string joined;
  for (const auto& t : toks) joined += t.leading + t.lexeme;
  CHECK(joined == "  // hi\nx <- 1;");
}

TEST_CASE("lexer rejects stray characters") {
  CHECK_THROWS_AS(tokenize("x @ y"), CompileError);
}

TEST_CASE("class fragment parses with combinators") {
  auto u = parse_source(kUnitClass);
  REQUIRE(u.classes.size() == 1);
  const auto& c = u.classes[0];
  CHECK(c.state.size() == 5);
  REQUIRE(c.effects.size() == 3);
  CHECK(c.effects[0].comb == Combinator::Avg);
  CHECK(c.effects[2].comb == Combinator::Sum);
}

TEST_CASE("format is a fixed point of parse") {
  std::string src = std::string(kUnitClass) + kCountScript +
                    "on Unit when (health < 0) restart {\n  destroy this;\n}\n";
  auto u = parse_source(src);
  std::string once = format_ast(u);
  auto again = parse_source(once);
  CHECK(ast_equal(u, again));
  CHECK(format_ast(again) == once);
}

TEST_CASE("empty unit formats to empty text") {
  CHECK(format_ast(parse_source("")) == "");
}

TEST_CASE("precedence survives formatting") {
  auto e = parse_expression("(a + b) * -(c - d) / e % f");
  auto back = parse_expression(format_expr(*e));
  CHECK(ast_equal(*e, *back));
  CHECK(format_expr(*parse_expression("a - (b - c)")) == "a - (b - c)");
  CHECK(format_expr(*parse_expression("(a - b) - c")) == "a - b - c");
}

TEST_CASE("else-if chains round-trip") {
  auto u = parse_source("run s(this: A) { if (a) { x <- 1; } else if (b) { x <- 2; } else { x <- 3; } }");
  CHECK(ast_equal(u, parse_source(format_ast(u))));
}

TEST_CASE("syntax diagnostics carry stable codes") {
  CHECK(code_of("class A { state: number x = ; }") == "E_SYNTAX");
  CHECK(code_of("class A { effects: number v : median; }") == "E_BAD_COMBINATOR");
  CHECK(code_of("class A { } class A { }") == "E_DUP_CLASS");
  CHECK(code_of("class A { state: number x; number x; }") == "E_DUP_FIELD");
}
