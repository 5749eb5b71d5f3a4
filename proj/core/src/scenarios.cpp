#include "sgl/scenarios.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "sgl/value.hpp"

namespace sgl {

using nlohmann::json;

std::uint64_t WorldRng::next() {
  s_ += 0x9e3779b97f4a7c15ull;
  return mix64(s_);
}

namespace {

const char* kRangeCount = R"(class Unit {
state:
  number player = 0;
  number x = 0;
  number y = 0;
  number health = 0;
  number range = 1;
  number nearby = 0;
effects:
  number vx : avg;
  number vy : avg;
  number damage : sum;
  number seen : sum;
update:
  health = health - damage;
  nearby = seen;
}

run count(this: Unit) {
  accum number cnt with sum over Unit u from Unit {
    if (u.x >= x - range && u.x <= x + range &&
        u.y >= y - range && u.y <= y + range) {
      cnt <- 1;
    }
  } in {
    seen <- cnt;
  }
}
)";

const char* kShop = R"(class Seller {
state:
  int itemCount = 1;
effects:
  int sold : sum;
update:
  itemCount = itemCount - sold;
constraints:
  itemCount >= 0;
}

class Buyer {
state:
  number account = 0;
  number price = 0;
  int owned = 0;
  ref<Seller> seller = null;
effects:
  number pay : sum;
  int got : sum;
update:
  account = account - pay;
  owned = owned + got;
constraints:
  account > 0;
}

run shop(this: Buyer) {
  if (owned == 0) {
    atomic {
      seller.sold <- 1;
      pay <- price;
      got <- 1;
    }
  }
}
)";

const char* kQuestClass = R"(class Item {
state:
  number weight = 1;
}

class Unit {
state:
  number x = 0;
  number y = 0;
  number health = 10;
  number tx = 0;
  number ty = 0;
  ref<Item> item = null;
  ref<Unit> foe = null;
  set<ref<Item>> items = {};
  int step = 0;
effects:
  number moveX : avg;
  number moveY : avg;
  number damage : sum;
  set<ref<Item>> itemsAcquired : setUnion;
  int stepTo : max;
update:
  x = moveX;
  y = moveY;
  health = health - damage;
  items = union(items, itemsAcquired);
  step = stepTo;
}
)";

const char* kQuestScript = R"(
run quest(this: Unit) {
  moveX <- tx; moveY <- ty;
  waitNextTick;
  if (item != null) { itemsAcquired <= item; }
  waitNextTick;
  if (foe != null) { foe.damage <- 1; }
}
)";

const char* kQuestExplicit = R"(
run quest(this: Unit) {
  if (step == 0) {
    moveX <- tx; moveY <- ty;
    stepTo <- 1;
  } else if (step == 1) {
    if (item != null) { itemsAcquired <= item; }
    stepTo <- 2;
  } else {
    if (foe != null) { foe.damage <- 1; }
    stepTo <- 0;
  }
}
)";

const char* kBattle = R"(class Unit {
state:
  number x = 0;
  number y = 0;
  number range = 2;
  number wx = 0;
  number wy = 0;
  number cx = 0;
  number cy = 0;
  int rally = 0;
  number near = 0;
effects:
  number vx : avg;
  number vy : avg;
  number seen : sum;
update:
  x = x + vx;
  y = y + vy;
  near = seen;
}

run roam(this: Unit) {
  accum number n with sum over Unit u from Unit {
    if (u.x >= x - range && u.x <= x + range &&
        u.y >= y - range && u.y <= y + range && u != this) {
      n <- 1;
    }
  } in {
    seen <- n;
    if (tick() >= rally) {
      vx <- cx - x; vy <- cy - y;
    } else {
      vx <- wx; vy <- wy;
    }
  }
}
)";

json object(const char* cls, std::size_t id, json fields) {
  return json{{"class", cls}, {"id", id}, {"fields", std::move(fields)}};
}

std::string doc(json objects) { return json{{"objects", std::move(objects)}}.dump(); }

Scenario range_count(std::size_t n, std::uint64_t seed) {
  WorldRng rng(seed);
  double side = std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1))) * 8.0;
  json objs = json::array();
  for (std::size_t i = 1; i <= n; ++i) {
    objs.push_back(object("Unit", i,
                          {{"player", static_cast<double>(i % 2)},
                           {"x", rng.uniform(0, side)},
                           {"y", rng.uniform(0, side)},
                           {"range", rng.uniform(1, 5)}}));
  }
  return {"fig2-count", kRangeCount, doc(std::move(objs))};
}

Scenario shop(std::size_t n, std::uint64_t seed) {
  WorldRng rng(seed);
  json objs = json::array();
  objs.push_back(object("Seller", 1, json::object()));
  double price = rng.uniform(5, 20);
  std::size_t rich = 2 + rng.below(n);  // at least one buyer can afford the item
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id = 2 + i;
    double account = id == rich ? price + rng.uniform(0.5, 10) : rng.uniform(0.5, 2 * price);
    objs.push_back(object("Buyer", id, {{"account", account}, {"price", price}, {"seller", 1}}));
  }
  return {"shop", kShop, doc(std::move(objs))};
}

Scenario quest(std::size_t n, std::uint64_t seed, bool explicit_pc) {
  WorldRng rng(seed);
  json objs = json::array();
  std::size_t items = std::max<std::size_t>(1, n / 4);
  for (std::size_t i = 1; i <= items; ++i) objs.push_back(object("Item", i, {{"weight", rng.uniform(1, 3)}}));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id = items + 1 + i;
    json item = rng.uniform() < 0.8 ? json(1 + rng.below(items)) : json(nullptr);
    json foe = rng.uniform() < 0.8 ? json(items + 1 + rng.below(n)) : json(nullptr);
    objs.push_back(object("Unit", id,
                          {{"x", rng.uniform(0, 50)},
                           {"y", rng.uniform(0, 50)},
                           {"tx", rng.uniform(0, 50)},
                           {"ty", rng.uniform(0, 50)},
                           {"item", item},
                           {"foe", foe}}));
  }
  return {explicit_pc ? "quest-explicit" : "quest",
          std::string(kQuestClass) + (explicit_pc ? kQuestExplicit : kQuestScript), doc(std::move(objs))};
}

Scenario battle(std::size_t n, std::uint64_t seed) {
  WorldRng rng(seed);
  const std::int64_t phase = 10;
  double side = std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1))) * 20.0;
  json objs = json::array();
  for (std::size_t i = 1; i <= n; ++i) {
    objs.push_back(object("Unit", i,
                          {{"x", rng.uniform(0, side)},
                           {"y", rng.uniform(0, side)},
                           {"wx", rng.uniform(-0.5, 0.5)},
                           {"wy", rng.uniform(-0.5, 0.5)},
                           {"cx", side / 2 + rng.uniform(-1, 1)},
                           {"cy", side / 2 + rng.uniform(-1, 1)},
                           {"rally", phase}}));
  }
  Scenario s{"battle", kBattle, doc(std::move(objs))};
  s.phase_tick = phase;
  return s;
}

}  // namespace

std::vector<std::string> scenario_names() { return {"fig2-count", "shop", "quest", "quest-explicit", "battle"}; }

Scenario make_scenario(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (name == "fig2-count") return range_count(n, seed);
  if (name == "shop") return shop(n, seed);
  if (name == "quest") return quest(n, seed, false);
  if (name == "quest-explicit") return quest(n, seed, true);
  if (name == "battle") return battle(n, seed);
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace sgl
