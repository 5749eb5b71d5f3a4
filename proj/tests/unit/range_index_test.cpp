#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgl/range_index.hpp"

using namespace sgl;

namespace {

std::vector<ObjectId> scan(int d, const std::vector<double>& coords, const std::vector<ObjectId>& ids, const Box& box) {
  std::vector<ObjectId> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    bool in = true;
    for (int k = 0; k < d; ++k) {
      double x = coords[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
      in = in && box.lo[static_cast<std::size_t>(k)] <= x && x <= box.hi[static_cast<std::size_t>(k)];
    }
    if (in) out.push_back(ids[i]);
  }
  return out;
}

std::vector<ObjectId> sorted(std::vector<ObjectId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("three points, box covering the first two") {
  std::vector<double> c{0, 0, 5, 5, 10, 10};
  std::vector<ObjectId> ids{1, 2, 3};
  RangeIndex idx(2, c, ids);
  std::vector<ObjectId> out;
  idx.query({{-1, -1}, {6, 6}}, out);
  CHECK(sorted(out) == std::vector<ObjectId>{1, 2});
}

TEST_CASE("empty index and degenerate boxes") {
  RangeIndex empty(2, {}, {});
  std::vector<ObjectId> out;
  empty.query({{-1e9, -1e9}, {1e9, 1e9}}, out);
  CHECK(out.empty());
  std::vector<double> c{1, 1};
  std::vector<ObjectId> ids{7};
  RangeIndex one(2, c, ids);
  one.query({{2, 0}, {0, 5}}, out);
  CHECK(out.empty());
  one.query({{NAN, 0}, {5, 5}}, out);
  CHECK(out.empty());
  CHECK_THROWS_AS(one.query({{0}, {1}}, out), std::invalid_argument);
}

TEST_CASE("index equals scan on random data with duplicates and NaN") {
  std::mt19937_64 rng(42);
  for (int d = 1; d <= 4; ++d) {
    for (int trial = 0; trial < 20; ++trial) {
      std::size_t n = rng() % 400;
      std::vector<double> c;
      std::vector<ObjectId> ids;
      for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(static_cast<ObjectId>(i + 1));
        for (int k = 0; k < d; ++k) {
          double x = static_cast<double>(rng() % 50);
          if (rng() % 97 == 0) x = NAN;
          c.push_back(x);
        }
      }
      RangeIndex idx(d, c, ids);
      for (int q = 0; q < 20; ++q) {
        Box b;
        for (int k = 0; k < d; ++k) {
          double a = static_cast<double>(rng() % 60) - 5, w = static_cast<double>(rng() % 30);
          b.lo.push_back(a);
          b.hi.push_back(a + w);
        }
        std::vector<ObjectId> out;
        idx.query(b, out);
        REQUIRE(sorted(out) == scan(d, c, ids, b));
      }
    }
  }
}

TEST_CASE("maintained index tracks moves, spawns and removals") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> c;
  std::vector<ObjectId> ids;
  for (int i = 0; i < 500; ++i) {
    ids.push_back(i + 1);
    c.push_back(u(rng));
    c.push_back(u(rng));
  }
  MaintainedIndex mi(2);
  CHECK(mi.refresh(c, ids));
  ObjectId next = 501;
  for (int tick = 0; tick < 30; ++tick) {
    std::size_t moves = tick % 5 == 0 ? 200 : 10;
    for (std::size_t m = 0; m < moves; ++m) c[rng() % c.size()] = u(rng);
    // drop one, add one
    std::size_t drop = rng() % ids.size();
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(drop));
    c.erase(c.begin() + static_cast<std::ptrdiff_t>(2 * drop), c.begin() + static_cast<std::ptrdiff_t>(2 * drop + 2));
    ids.push_back(next++);
    c.push_back(u(rng));
    c.push_back(u(rng));
    mi.refresh(c, ids);
    for (int q = 0; q < 10; ++q) {
      double x = u(rng), y = u(rng);
      Box b{{x - 10, y - 10}, {x + 10, y + 10}};
      std::vector<ObjectId> out;
      mi.query(b, out);
      REQUIRE(sorted(out) == scan(2, c, ids, b));
    }
  }
  CHECK(mi.rebuilds() > 1);
}

TEST_CASE("node count grows like n log^(d-1) n") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int d = 2; d <= 3; ++d) {
    std::size_t n = 2000;
    std::vector<double> c(n * static_cast<std::size_t>(d));
    for (auto& x : c) x = u(rng);
    std::vector<ObjectId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<ObjectId>(i + 1);
    RangeIndex idx(d, c, ids);
    double bound = RangeIndex::kSizeConstant * static_cast<double>(n) * std::pow(std::log2(static_cast<double>(n)), d - 1);
    CHECK(static_cast<double>(idx.node_count()) <= bound);
    CHECK(idx.node_count() >= n);
  }
}
