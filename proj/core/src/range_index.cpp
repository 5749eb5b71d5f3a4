#include "sgl/range_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sgl {

struct RangeIndex::Level {
  int k = 0;
  std::vector<std::uint32_t> order;             // point indices sorted by coordinate k
  std::vector<std::unique_ptr<Level>> assoc;    // heap-numbered internal nodes -> next level
};

RangeIndex::RangeIndex() = default;
RangeIndex::RangeIndex(RangeIndex&&) noexcept = default;
RangeIndex& RangeIndex::operator=(RangeIndex&&) noexcept = default;
RangeIndex::~RangeIndex() = default;

bool box_contains(const Box& box, std::span<const double> p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(box.lo[j] <= p[j] && p[j] <= box.hi[j])) return false;
  }
  return true;
}

RangeIndex::RangeIndex(int d, std::span<const double> coords, std::span<const ObjectId> ids) : d_(d) {
  if (d < 1 || d > 4) throw std::invalid_argument("range index dimensionality must be 1..4");
  if (coords.size() != ids.size() * static_cast<std::size_t>(d)) throw std::invalid_argument("coords/ids size mismatch");
  coords_.assign(coords.begin(), coords.end());
  ids_.assign(ids.begin(), ids.end());
  std::vector<std::uint32_t> order;
  order.reserve(ids_.size());
  for (std::uint32_t i = 0; i < ids_.size(); ++i) {
    bool nan = false;
    for (int k = 0; k < d_; ++k) nan = nan || std::isnan(coord(i, k));
    if (!nan) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    double x = coord(a, 0), y = coord(b, 0);
    return x < y || (x == y && a < b);
  });
  root_ = build(std::move(order), 0);
}

std::unique_ptr<RangeIndex::Level> RangeIndex::build(std::vector<std::uint32_t> order, int k) {
  auto lv = std::make_unique<Level>();
  lv->k = k;
  lv->order = std::move(order);
  nodes_ += lv->order.size();
  if (k < d_ - 1 && lv->order.size() > kLeafBucket) {
    std::vector<std::uint32_t> all;
    make(*lv, 1, 0, lv->order.size(), all);
  }
  return lv;
}

void RangeIndex::make(Level& lv, std::size_t node, std::size_t lo, std::size_t hi, std::vector<std::uint32_t>& out) {
  int next = lv.k + 1;
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    double x = coord(a, next), y = coord(b, next);
    return x < y || (x == y && a < b);
  };
  if (hi - lo <= kLeafBucket) {
    out.assign(lv.order.begin() + static_cast<std::ptrdiff_t>(lo), lv.order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(out.begin(), out.end(), less);
    return;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  std::vector<std::uint32_t> left, right;
  make(lv, 2 * node, lo, mid, left);
  make(lv, 2 * node + 1, mid, hi, right);
  out.resize(left.size() + right.size());
  std::merge(left.begin(), left.end(), right.begin(), right.end(), out.begin(), less);
  if (lv.assoc.size() <= node) lv.assoc.resize(node + 1);
  lv.assoc[node] = build(out, next);
}

bool RangeIndex::inside(std::uint32_t p, const Box& box, int from) const {
  for (int j = from; j < d_; ++j) {
    double x = coord(p, j);
    if (!(box.lo[static_cast<std::size_t>(j)] <= x && x <= box.hi[static_cast<std::size_t>(j)])) return false;
  }
  return true;
}

void RangeIndex::query(const Box& box, std::vector<ObjectId>& out) const {
  if (box.lo.size() != static_cast<std::size_t>(d_) || box.hi.size() != static_cast<std::size_t>(d_)) {
    throw std::invalid_argument("box dimensionality does not match index");
  }
  for (int j = 0; j < d_; ++j) {
    if (!(box.lo[static_cast<std::size_t>(j)] <= box.hi[static_cast<std::size_t>(j)])) return;
  }
  if (root_) search(*root_, box, out);
}

void RangeIndex::search(const Level& lv, const Box& box, std::vector<ObjectId>& out) const {
  int k = lv.k;
  double lo = box.lo[static_cast<std::size_t>(k)];
  double hi = box.hi[static_cast<std::size_t>(k)];
  auto first = std::partition_point(lv.order.begin(), lv.order.end(), [&](std::uint32_t p) { return coord(p, k) < lo; });
  auto last = std::partition_point(first, lv.order.end(), [&](std::uint32_t p) { return coord(p, k) <= hi; });
  if (first >= last) return;
  if (k == d_ - 1) {
    for (auto it = first; it != last; ++it) out.push_back(ids_[*it]);
    return;
  }
  descend(lv, 1, 0, lv.order.size(), static_cast<std::size_t>(first - lv.order.begin()),
          static_cast<std::size_t>(last - lv.order.begin()), box, out);
}

void RangeIndex::descend(const Level& lv, std::size_t node, std::size_t lo, std::size_t hi, std::size_t a,
                         std::size_t b, const Box& box, std::vector<ObjectId>& out) const {
  if (b <= lo || hi <= a) return;
  if (hi - lo <= kLeafBucket) {
    for (std::size_t pos = std::max(lo, a); pos < std::min(hi, b); ++pos) {
      std::uint32_t p = lv.order[pos];
      if (inside(p, box, lv.k + 1)) out.push_back(ids_[p]);
    }
    return;
  }
  if (a <= lo && hi <= b) {
    search(*lv.assoc[node], box, out);
    return;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  descend(lv, 2 * node, lo, mid, a, b, box, out);
  descend(lv, 2 * node + 1, mid, hi, a, b, box, out);
}

bool MaintainedIndex::refresh(std::span<const double> coords, std::span<const ObjectId> ids) {
  std::size_t n = ids.size();
  auto rebuild = [&] {
    base_ = RangeIndex(d_, coords, ids);
    base_pos_.clear();
    base_pos_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) base_pos_[ids[i]] = i;
    tombstones_.clear();
    extra_coords_.clear();
    extra_ids_.clear();
    built_ = true;
    ++rebuilds_;
    return true;
  };
  if (!built_) return rebuild();

  std::size_t dd = static_cast<std::size_t>(d_);
  std::vector<std::uint8_t> seen(base_.size(), 0);
  std::vector<std::size_t> changed;
  std::size_t removed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = base_pos_.find(ids[i]);
    if (it == base_pos_.end()) {
      changed.push_back(i);
      continue;
    }
    seen[it->second] = 1;
    auto old = base_.point(it->second);
    if (std::memcmp(old.data(), coords.data() + i * dd, dd * sizeof(double)) != 0) changed.push_back(i);
  }
  for (auto s : seen) removed += s ? 0 : 1;
  if (static_cast<double>(changed.size() + removed) > rebuild_fraction_ * static_cast<double>(std::max<std::size_t>(n, 1))) {
    return rebuild();
  }
  tombstones_.clear();
  extra_coords_.clear();
  extra_ids_.clear();
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) tombstones_[base_.id(i)] = 1;
  }
  for (std::size_t i : changed) {
    if (base_pos_.count(ids[i])) tombstones_[ids[i]] = 1;
    extra_ids_.push_back(ids[i]);
    extra_coords_.insert(extra_coords_.end(), coords.begin() + static_cast<std::ptrdiff_t>(i * dd),
                         coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * dd));
  }
  return false;
}

void MaintainedIndex::query(const Box& box, std::vector<ObjectId>& out) const {
  std::size_t start = out.size();
  base_.query(box, out);
  if (!tombstones_.empty()) {
    auto w = out.begin() + static_cast<std::ptrdiff_t>(start);
    for (auto r = w; r != out.end(); ++r) {
      if (!tombstones_.count(*r)) *w++ = *r;
    }
    out.erase(w, out.end());
  }
  std::size_t dd = static_cast<std::size_t>(d_);
  for (std::size_t i = 0; i < extra_ids_.size(); ++i) {
    if (box_contains(box, std::span<const double>(extra_coords_.data() + i * dd, dd))) out.push_back(extra_ids_[i]);
  }
}

}  // namespace sgl
