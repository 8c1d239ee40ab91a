#pragma once

#include <string>
#include <variant>
#include <vector>

namespace stablefield {

/// A slowly varying function L(x) on (0, inf), frozen below a cutoff b >= 1.
///
/// Four families are supported:
///  - Constant(v): L == v.
///  - ParetoCanonical(alpha): the truncated-second-moment L of an innovation
///    with P(|xi| > x) = x^-alpha for x >= 1. For alpha < 2 this is
///    1 - x^(alpha-2) above b = (2/alpha)^(1/(2-alpha)); for alpha = 2 it is
///    2 ln x above b = sqrt(e).
///  - LogPower(e): max(1, ln x)^e.
///  - Tabulated(grid, values): linear interpolation in log x, clamped at the
///    ends and frozen below max(1, grid.front()).
class SlowVary {
 public:
  struct Constant {
    double value;
  };
  struct ParetoCanonical {
    double alpha;
  };
  struct LogPower {
    double exponent;
  };
  struct Tabulated {
    std::vector<double> grid;
    std::vector<double> values;
  };
  using Kind = std::variant<Constant, ParetoCanonical, LogPower, Tabulated>;

  static SlowVary constant(double value);
  static SlowVary pareto_canonical(double alpha);
  static SlowVary log_power(double exponent);
  static SlowVary tabulated(std::vector<double> grid, std::vector<double> values);

  /// L(x); throws domain_error for x <= 0.
  double operator()(double x) const;

  /// Point b below which L is frozen.
  double cutoff() const { return cutoff_; }

  /// Smallest C found such that L(x) <= C x^delta for every x >= 1.
  /// Returns +inf when no such bound exists for this delta.
  double power_bound(double delta) const;

  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
  const Kind& kind() const { return kind_; }
  std::string describe() const;

  friend bool operator==(const SlowVary& a, const SlowVary& b);

 private:
  explicit SlowVary(Kind kind);
  double evaluate_unfrozen(double x) const;

  Kind kind_;
  double cutoff_ = 1.0;
  double frozen_value_ = 1.0;
};

double eval(const SlowVary& L, double x);

/// One summand (|b|/scale)^alpha * L(scale/|b|) of the normalizing sum;
/// exactly 0 when b == 0.
double weighted_term(const SlowVary& L, double alpha, double b, double scale);

}  // namespace stablefield
