#include "stablefield/lattice.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stablefield/error.hpp"
#include "stablefield/rng.hpp"

namespace stablefield {

std::uint64_t Rect::count() const {
  std::uint64_t total = 1;
  for (std::size_t l = 0; l < dim(); ++l) {
    const auto side = static_cast<std::uint64_t>(upper[l] - lower[l] + 1);
    if (side != 0 && total > std::numeric_limits<std::uint64_t>::max() / side) {
      fail(ErrorCode::kNumeric, "rectangle cardinality overflows 64 bits");
    }
    total *= side;
  }
  return total;
}

bool Rect::contains(std::span<const Index> point) const {
  if (point.size() != dim()) return false;
  for (std::size_t l = 0; l < dim(); ++l) {
    if (point[l] < lower[l] || point[l] > upper[l]) return false;
  }
  return true;
}

bool Rect::intersects(const Rect& other) const {
  for (std::size_t l = 0; l < dim(); ++l) {
    if (upper[l] < other.lower[l] || other.upper[l] < lower[l]) return false;
  }
  return true;
}

RegionUnion::RegionUnion(std::vector<Rect> rects) : rects_(std::move(rects)) {
  dim_ = rects_.empty() ? 0 : rects_.front().dim();
}

Rect RegionUnion::bounding_box() const {
  if (rects_.empty()) fail(ErrorCode::kValidation, "empty region has no bounding box");
  Rect box = rects_.front();
  for (const Rect& r : rects_) {
    for (std::size_t l = 0; l < dim_; ++l) {
      box.lower[l] = std::min(box.lower[l], r.lower[l]);
      box.upper[l] = std::max(box.upper[l], r.upper[l]);
    }
  }
  return box;
}

bool RegionUnion::contains(std::span<const Index> point) const {
  for (const Rect& r : rects_) {
    if (r.contains(point)) return true;
  }
  return false;
}

void validate(const RegionUnion& region) {
  const auto& rects = region.rects();
  if (rects.empty()) fail(ErrorCode::kValidation, "region must contain at least one rectangle");
  const std::size_t d = rects.front().dim();
  if (d == 0) fail(ErrorCode::kValidation, "region dimension must be at least 1");
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const Rect& r = rects[k];
    if (r.lower.size() != d || r.upper.size() != d) {
      fail(ErrorCode::kDimensionMismatch,
           "rectangle " + std::to_string(k) + " has dimension " + std::to_string(r.lower.size()) +
               "/" + std::to_string(r.upper.size()) + ", expected " + std::to_string(d));
    }
    for (std::size_t l = 0; l < d; ++l) {
      if (r.lower[l] > r.upper[l]) {
        fail(ErrorCode::kValidation, "rectangle " + std::to_string(k) +
                                         " has lower > upper on axis " + std::to_string(l));
      }
    }
  }
  for (std::size_t a = 0; a < rects.size(); ++a) {
    for (std::size_t b = a + 1; b < rects.size(); ++b) {
      if (rects[a].intersects(rects[b])) {
        fail(ErrorCode::kOverlap,
             "rectangles " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
      }
    }
  }
}

std::uint64_t cardinality(const RegionUnion& region) {
  std::uint64_t total = 0;
  for (const Rect& r : region.rects()) total += r.count();
  return total;
}

namespace regions {
namespace {

// floor(x) for x that should be an exact integer up to rounding noise.
Index robust_floor(double x) {
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) <= 1e-9 * std::max(1.0, std::fabs(x))) {
    return static_cast<Index>(nearest);
  }
  return static_cast<Index>(std::floor(x));
}

}  // namespace

RegionUnion cube(std::size_t d, Index n) {
  if (d == 0 || n < 0) fail(ErrorCode::kValidation, "cube region needs d >= 1 and n >= 0");
  return RegionUnion({Rect{Point(d, 0), Point(d, n)}});
}

RegionUnion symmetric_box(std::span<const double> c, Index n) {
  if (c.empty() || n < 0) fail(ErrorCode::kValidation, "symmetric box needs d >= 1 and n >= 0");
  Rect r{Point(c.size()), Point(c.size())};
  for (std::size_t l = 0; l < c.size(); ++l) {
    if (!(c[l] > 0.0)) fail(ErrorCode::kValidation, "symmetric box scales must be positive");
    const Index half = robust_floor(c[l] * static_cast<double>(n));
    r.lower[l] = -half;
    r.upper[l] = half;
  }
  return RegionUnion({r});
}

RegionUnion anisotropic_box(std::span<const double> beta, Index n) {
  if (beta.empty() || n < 1) fail(ErrorCode::kValidation, "anisotropic box needs d >= 1 and n >= 1");
  Rect r{Point(beta.size()), Point(beta.size())};
  for (std::size_t l = 0; l < beta.size(); ++l) {
    if (!(beta[l] > 0.0)) fail(ErrorCode::kValidation, "anisotropic box exponents must be positive");
    const Index half = robust_floor(std::pow(static_cast<double>(n), 1.0 / beta[l]));
    r.lower[l] = -half;
    r.upper[l] = half;
  }
  return RegionUnion({r});
}

RegionUnion scattered(std::size_t d, std::size_t J, Index span, Index max_side, std::uint64_t seed) {
  if (d == 0 || J == 0 || span < 1 || max_side < 1) {
    fail(ErrorCode::kValidation, "scattered region needs d, J, span, max_side >= 1");
  }
  RngStream rng(seed);
  std::vector<Rect> rects;
  rects.reserve(J);
  const std::size_t max_attempts = 10000 * J;
  std::size_t attempts = 0;
  while (rects.size() < J) {
    if (++attempts > max_attempts) {
      fail(ErrorCode::kValidation, "could not place " + std::to_string(J) +
                                       " disjoint rectangles; enlarge span or shrink max_side");
    }
    Rect candidate{Point(d), Point(d)};
    for (std::size_t l = 0; l < d; ++l) {
      candidate.lower[l] = static_cast<Index>(rng.below(static_cast<std::uint64_t>(span)));
      candidate.upper[l] =
          candidate.lower[l] + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_side)));
    }
    bool clash = false;
    for (const Rect& r : rects) {
      if (r.intersects(candidate)) {
        clash = true;
        break;
      }
    }
    if (!clash) rects.push_back(std::move(candidate));
  }
  return RegionUnion(std::move(rects));
}

}  // namespace regions
}  // namespace stablefield
