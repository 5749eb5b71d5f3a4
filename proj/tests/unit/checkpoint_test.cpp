#include "doctest.h"

#include <sstream>

#include "harness.hpp"
#include "sgl/checkpoint.hpp"
#include "sgl/diagnostics.hpp"

using namespace sgl;
using namespace sgl::testing;

namespace {

const std::string kDrift = R"(
class Mote {
state:
  number x = 0;
  int hops = 0;
  number wobble = 0;
effects:
  number push : sum;
  int hop : sum;
update:
  x = x + push;
  hops = hops + hop;
  wobble = wobble * 0.5 + push;
}
run drift(this: Mote) {
  accum number near with sum over Mote m from Mote {
    if (m.x >= x - 2 && m.x <= x + 2 && m != this) { near <- 1; }
  } in {
    push <- random() - 0.5 + near * 0.01;
  }
  waitNextTick;
  hop <- 1;
  push <- 0 / 0 * 0;
}
)";

std::string motes(int n) {
  std::string s = R"({"objects": [)";
  for (int i = 1; i <= n; ++i) {
    if (i > 1) s += ",";
    s += R"({"class": "Mote", "id": )" + std::to_string(i) + R"(, "fields": {"x": )" + std::to_string(i % 7) + "}}";
  }
  return s + "]}";
}

EngineConfig cfg(EngineKind k) {
  EngineConfig c;
  c.engine = k;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("checkpoint then restore reproduces the state") {
  auto w = make_world(kDrift, motes(12), cfg(EngineKind::Relational));
  for (int i = 0; i < 3; ++i) w->run_tick();
  auto text = checkpoint_text(*w);
  auto r = restore_world(w->program_ptr(), cfg(EngineKind::Relational), text);
  CHECK(state_equal(*w->snapshot(), *r->snapshot()));
  CHECK(r->tick() == 3);
  CHECK(checkpoint_text(*r) == text);
}

TEST_CASE("resume from the middle matches an uninterrupted run") {
  for (auto k : {EngineKind::Relational, EngineKind::Reference}) {
    auto full = make_world(kDrift, motes(30), cfg(k));
    std::string mid;
    for (int i = 0; i < 20; ++i) {
      if (i == 10) mid = checkpoint_text(*full);
      full->run_tick();
    }
    auto r = restore_world(full->program_ptr(), cfg(k), mid);
    for (int i = 0; i < 10; ++i) r->run_tick();
    CHECK(state_equal(*full->snapshot(), *r->snapshot()));
    CHECK(fingerprint(*full->snapshot()) == fingerprint(*r->snapshot()));
  }
}

TEST_CASE("restore in place rewinds") {
  auto w = make_world(kDrift, motes(5), cfg(EngineKind::Relational));
  w->run_tick();
  auto text = checkpoint_text(*w);
  auto at1 = w->snapshot();
  w->run_tick();
  w->run_tick();
  restore_into(*w, text);
  CHECK(w->tick() == 1);
  CHECK(state_equal(*w->snapshot(), *at1));
}

TEST_CASE("empty world checkpoint is loadable") {
  auto w = make_world(kDrift, R"({"objects": []})", cfg(EngineKind::Relational));
  std::ostringstream os;
  auto meta = write_checkpoint(*w, os);
  CHECK(meta.tick == 0);
  auto r = restore_world(w->program_ptr(), cfg(EngineKind::Relational), os.str());
  CHECK(r->snapshot()->object_count() == 0);
}

TEST_CASE("damaged, foreign and future checkpoints are refused") {
  auto w = make_world(kDrift, motes(3), cfg(EngineKind::Relational));
  auto text = checkpoint_text(*w);
  auto code_of = [&](const std::string& t, const Program& p) {
    try {
      read_checkpoint(p, t);
    } catch (const EngineError& e) {
      return e.code();
    }
    return std::string("ok");
  };
  CHECK(code_of(text, w->program()) == "ok");

  std::string bad = text;
  auto pos = bad.find("\"nextId\":4");
  REQUIRE(pos != std::string::npos);
  bad.replace(pos, 10, "\"nextId\":5");
  CHECK(code_of(bad, w->program()) == "E_CHECKPOINT_CORRUPT");
  CHECK(code_of("{not json", w->program()) == "E_CHECKPOINT_CORRUPT");

  auto other = compile(kDrift + "\nclass Extra { state: number q = 0; }\n");
  CHECK(code_of(text, *other) == "E_CHECKPOINT_UNIT");

  std::string future = text;
  future.replace(future.find("\"version\":1"), 11, "\"version\":2");
  CHECK(code_of(future, w->program()) == "E_CHECKPOINT_VERSION");
}
