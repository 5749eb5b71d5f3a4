#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "sgl/value.hpp"

namespace sgl {

/// Axis-aligned box with inclusive bounds. A dimension with lo > hi (or a
/// NaN bound) matches nothing.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Layered orthogonal range tree over d numeric dimensions (1 <= d <= 4).
/// Each level is a balanced tree over points sorted by one coordinate;
/// every internal node larger than a leaf bucket carries the next level's
/// tree over its points. Leaf buckets are scanned linearly. Points with a
/// NaN coordinate are never reported, exactly like a scan with `lo <= x <= hi`.
///
/// Space: at most n * (log2(n) + 1)^(d-1) stored entries, so
/// node_count() <= kSizeConstant * n * log2(n)^(d-1) for n >= 2.
class RangeIndex {
 public:
  static constexpr std::size_t kLeafBucket = 8;
  static constexpr double kSizeConstant = 2.0;

  RangeIndex();
  /// coords is row-major n x d.
  RangeIndex(int d, std::span<const double> coords, std::span<const ObjectId> ids);

  int dims() const { return d_; }
  std::size_t size() const { return ids_.size(); }
  /// Total entries stored across all levels.
  std::size_t node_count() const { return nodes_; }

  /// Appends matching ids (unordered). Throws std::invalid_argument on a
  /// dimensionality mismatch.
  void query(const Box& box, std::vector<ObjectId>& out) const;

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  ObjectId id(std::size_t i) const { return ids_[i]; }

 private:
  struct Level;
  int d_ = 0;
  std::vector<double> coords_;
  std::vector<ObjectId> ids_;
  std::unique_ptr<Level> root_;
  std::size_t nodes_ = 0;

  std::unique_ptr<Level> build(std::vector<std::uint32_t> order, int k);
  void make(Level& lv, std::size_t node, std::size_t lo, std::size_t hi, std::vector<std::uint32_t>& out);
  void search(const Level& lv, const Box& box, std::vector<ObjectId>& out) const;
  void descend(const Level& lv, std::size_t node, std::size_t lo, std::size_t hi, std::size_t a, std::size_t b,
               const Box& box, std::vector<ObjectId>& out) const;
  bool inside(std::uint32_t p, const Box& box, int from) const;
  double coord(std::uint32_t p, int k) const { return coords_[p * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)]; }

 public:
  RangeIndex(RangeIndex&&) noexcept;
  RangeIndex& operator=(RangeIndex&&) noexcept;
  ~RangeIndex();
};

/// Range index kept in step with a changing table: a built base plus a delta
/// overlay (tombstoned ids and changed/new points). The base is rebuilt when
/// the overlay exceeds `rebuild_fraction` of the rows.
class MaintainedIndex {
 public:
  explicit MaintainedIndex(int d, double rebuild_fraction = 0.25) : d_(d), rebuild_fraction_(rebuild_fraction) {}

  /// Brings the index up to date with the given rows (row-major n x d).
  /// Returns true when the base was rebuilt.
  bool refresh(std::span<const double> coords, std::span<const ObjectId> ids);
  void query(const Box& box, std::vector<ObjectId>& out) const;

  const RangeIndex& base() const { return base_; }
  std::size_t overlay_size() const { return extra_ids_.size() + tombstones_.size(); }
  std::size_t rebuilds() const { return rebuilds_; }

 private:
  int d_;
  double rebuild_fraction_;
  RangeIndex base_;
  std::unordered_map<ObjectId, std::size_t> base_pos_;
  std::unordered_map<ObjectId, std::uint8_t> tombstones_;
  std::vector<double> extra_coords_;
  std::vector<ObjectId> extra_ids_;
  std::size_t rebuilds_ = 0;
  bool built_ = false;
};

/// Reference semantics for a single point.
bool box_contains(const Box& box, std::span<const double> p);

}  // namespace sgl
