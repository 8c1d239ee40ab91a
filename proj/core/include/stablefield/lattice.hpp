#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stablefield {

using Index = std::int64_t;
using Point = std::vector<Index>;

/// Discrete rectangle prod_l [lower_l, upper_l] in Z^d (bounds inclusive).
/// Degenerate rectangles, including single points, are allowed.
struct Rect {
  Point lower;
  Point upper;

  std::size_t dim() const { return lower.size(); }
  std::uint64_t count() const;
  bool contains(std::span<const Index> point) const;
  bool intersects(const Rect& other) const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Finite union of pairwise disjoint rectangles, the summation region.
class RegionUnion {
 public:
  RegionUnion() = default;
  explicit RegionUnion(std::vector<Rect> rects);

  std::size_t dim() const { return dim_; }
  std::size_t rect_count() const { return rects_.size(); }  // J
  const std::vector<Rect>& rects() const { return rects_; }
  Rect bounding_box() const;
  bool contains(std::span<const Index> point) const;

  friend bool operator==(const RegionUnion&, const RegionUnion&) = default;

 private:
  std::vector<Rect> rects_;
  std::size_t dim_ = 0;
};

/// Throws dimension_mismatch / overlap_error (naming both rectangle
/// indices) / validation_error for malformed regions.
void validate(const RegionUnion& region);

/// Exact number of lattice points; the region must be valid.
std::uint64_t cardinality(const RegionUnion& region);

namespace regions {

/// [0, n]^d.
RegionUnion cube(std::size_t d, Index n);

/// { k : |k_l| <= floor(c_l n) }.
RegionUnion symmetric_box(std::span<const double> c, Index n);

/// { k : |k_l| <= floor(n^(1/beta_l)) }.
RegionUnion anisotropic_box(std::span<const double> beta, Index n);

/// J pairwise-disjoint random rectangles with corners in [0, span)^d and side
/// lengths in [1, max_side]; deterministic in seed.
RegionUnion scattered(std::size_t d, std::size_t J, Index span, Index max_side, std::uint64_t seed);

}  // namespace regions

}  // namespace stablefield
