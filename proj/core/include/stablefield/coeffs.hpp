#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stablefield/lattice.hpp"
#include "stablefield/slowvary.hpp"

namespace stablefield {

/// Coefficient field {a_i} of the linear random field X_j = sum_i a_i xi_{j-i}.
///
/// Geometric and Farima are one-sided products over axes (a_i = 0 whenever a
/// coordinate is negative). Isotropic and Anisotropic are power laws in
/// |i|, with a_0 user supplied. Finite is an arbitrary finitely supported map.
class CoefficientModel {
 public:
  struct Geometric {
    std::vector<double> ratio;  // theta_l, |theta_l| < 1
  };
  struct Farima {
    std::vector<double> memory;  // beta_l in (0, 1)
  };
  struct Isotropic {
    double beta;
    std::size_t dim;
    double a0;
  };
  struct Anisotropic {
    std::vector<double> beta;
    double gamma;
    double a0;
  };
  struct Finite {
    std::size_t dim;
    std::vector<std::pair<Point, double>> entries;
  };
  using Kind = std::variant<Geometric, Farima, Isotropic, Anisotropic, Finite>;

  static CoefficientModel doubly_geometric(double theta, double rho);
  static CoefficientModel geometric(std::vector<double> ratio);
  static CoefficientModel farima(std::vector<double> memory);
  static CoefficientModel isotropic(double beta, std::size_t dim, double a0 = 1.0);
  static CoefficientModel anisotropic(std::vector<double> beta, double gamma, double a0 = 1.0);
  static CoefficientModel finite(std::size_t dim, std::vector<std::pair<Point, double>> entries);

  const Kind& kind() const { return kind_; }
  std::size_t dim() const;
  std::string describe() const;

  /// a_i; throws dimension_mismatch when i has the wrong length.
  double coeff(std::span<const Index> i) const;
  double operator()(std::span<const Index> i) const { return coeff(i); }

  /// True when a_i = prod_l g_l(i_l) with one-sided g_l.
  bool separable() const;
  /// Axis factor g_axis(j) of a separable model; 0 for j < 0.
  double axis_factor(std::size_t axis, Index j) const;
  /// g_axis(0..max_j), computed with the stable forward recurrence.
  std::vector<double> axis_table(std::size_t axis, Index max_j) const;

  /// sum_i |a_i| < infinity (analytic criterion per kind).
  bool ell1_finite() const;
  /// sum_i |a_i|^p < infinity (analytic criterion per kind).
  bool p_summable(double p) const;
  /// Throws model_invalid unless sum_i |a_i|^alpha L(1/|a_i|) is finite.
  void check_existence(double alpha) const;

  /// Smallest box containing the support, for Finite models.
  Rect support_box() const;

  /// Upper bound on sum over k outside { |k_l| <= margin_l } of
  /// |a_k|^s L(1/|a_k|). Pass L = nullptr for L == 1.
  double tail_bound(double s, const SlowVary* L, std::span<const Index> margin) const;

  /// Per-axis margin such that tail_bound(s, L, margin) <= eps, capped so no
  /// margin exceeds cap. For Finite models this is the exact support extent.
  std::vector<Index> window(double s, const SlowVary* L, double eps, Index cap) const;

 private:
  explicit CoefficientModel(Kind kind) : kind_(std::move(kind)) {}
  void check_dim(std::span<const Index> i) const;

  Kind kind_;
};

struct SummabilityReport {
  bool ell1_finite = false;
  double alpha_sum = 0.0;   // sum over the window of |a|^alpha L(1/|a|)
  double tail_bound = 0.0;  // analytic bound on the discarded remainder
  std::vector<Index> margin;
};

/// Sum of |a_k|^s L(1/|a_k|) over { |k_l| <= margin_l } (L = nullptr: L == 1).
double windowed_power_sum(const CoefficientModel& model, double s, const SlowVary* L,
                          std::span<const Index> margin);

/// Throws model_invalid when the field does not exist for this alpha.
SummabilityReport summability_report(const CoefficientModel& model, double alpha, const SlowVary& L,
                                     double eps_tail = 1e-6, Index cap = 1000);

}  // namespace stablefield
