#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "stablefield/coeffs.hpp"
#include "stablefield/lattice.hpp"
#include "stablefield/slowvary.hpp"

namespace stablefield {

/// Weights b_i stored densely over a box. Entries outside the box are zero
/// exactly or have been discarded; the discarded alpha-energy
/// sum |b_i|^alpha is bounded by tail_energy_bound().
class WeightField {
 public:
  WeightField() = default;
  WeightField(Rect box, std::vector<double> values, double tail_energy_bound = 0.0);

  /// Field from explicit (i, b_i) pairs; repeated indices are rejected.
  static WeightField from_entries(std::size_t dim, const std::vector<std::pair<Point, double>>& entries);
  /// One-dimensional field b_0, b_1, ... at indices 0..n-1.
  static WeightField from_values(std::vector<double> values);

  std::size_t dim() const { return box_.dim(); }
  const Rect& box() const { return box_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// b_i, zero outside the box.
  double at(std::span<const Index> i) const;
  /// Dense values in box order (last axis fastest).
  const std::vector<double>& values() const { return values_; }
  /// Nonzero values in box order; this is what a simulation draws against.
  std::vector<double> nonzero_values() const;
  std::size_t nonzero_count() const;
  Point point_of(std::size_t offset) const;

  double tail_energy_bound() const { return tail_energy_bound_; }
  bool truncated() const { return tail_energy_bound_ > 0.0; }
  /// Bound on the omitted part of sum (|b|/B)^alpha L(B/|b|); +inf when L
  /// is unbounded on [1, inf).
  double relative_tail(double B, double alpha, const SlowVary& L) const;

 private:
  std::size_t offset_of(std::span<const Index> i) const;

  Rect box_;
  std::vector<double> values_;
  std::vector<std::size_t> stride_;
  double tail_energy_bound_ = 0.0;
};

struct WeightOptions {
  enum class Strategy { kAuto, kDirect, kFast };

  double eps_tail = 1e-6;
  Index max_margin = 1000;
  /// When positive, the coefficient margin on axis l is
  /// ceil(margin_factor * side_l) instead of the eps_tail window. This keeps
  /// the truncated fraction of B_n fixed along a scaled region family.
  double margin_factor = 0.0;
  Strategy strategy = Strategy::kAuto;
  /// Drop the smallest entries carrying at most half of eps_tail of the energy.
  bool drop_small = true;
  std::size_t threads = 0;
};

/// b_i = sum_{j in region} a_{j-i} over the window implied by the options.
WeightField build_weights(const CoefficientModel& model, const RegionUnion& region, double alpha,
                          const SlowVary& L, const WeightOptions& options = {});

/// d-fold alternating sum of b over the 2^d corners i - eps, eps in {0,1}^d.
double increment(const WeightField& field, std::span<const Index> i);

struct WeightDiagnostics {
  double delta_n = 0.0;
  double rho_n = 0.0;
  double sup_b = 0.0;
  bool truncated = false;
};

WeightDiagnostics diagnostics(const WeightField& field, double B);

struct DeltaBoundCheck {
  double lhs = 0.0;     // Delta_n
  double rhs = 0.0;     // 2^d J^(1/q) ||a||_p
  double norm_p = 0.0;  // ||a||_p over the offsets used
  bool holds = false;
};

/// Delta_n from the corner form of the increments, against the explicit
/// bound. Coefficients are restricted to the window |k_l| <= margin chosen
/// with tolerance eps_tail (capped at max_margin); both sides use the same
/// restricted coefficients.
DeltaBoundCheck delta_bound_check(const CoefficientModel& model, const RegionUnion& region, double p,
                                  double q, double eps_tail = 1e-9, Index max_margin = 64);

/// Rows "i_1,...,i_d,b" for every nonzero entry, with a header row.
void write_csv(const WeightField& field, std::ostream& out);

}  // namespace stablefield
