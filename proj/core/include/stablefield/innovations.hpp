#pragma once

#include <complex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stablefield/rng.hpp"
#include "stablefield/slowvary.hpp"
#include "stablefield/stable.hpp"

namespace stablefield {

/// Innovation law of the random field.
///
/// ExactStable draws from a StableLaw. ParetoMix has P(xi > x) = c+ x^-alpha
/// and P(xi < -x) = c- x^-alpha for x >= 1, shifted by its mean
/// mu = (c+ - c-) alpha / (alpha - 1) when centered and alpha > 1.
class InnovationModel {
 public:
  struct ExactStable {
    StableLaw law;
  };
  struct ParetoMix {
    double alpha;
    double c_plus;
  };
  using Kind = std::variant<ExactStable, ParetoMix>;

  /// Throws condition_a_violation when Condition A fails: alpha = 1 needs a
  /// symmetric law, and an asymmetric ParetoMix with alpha > 1 must be centered.
  static InnovationModel exact_stable(const StableLaw& law);
  static InnovationModel pareto_mix(double alpha, double c_plus, bool centered = true);

  const Kind& kind() const { return kind_; }
  double alpha() const;
  bool centered() const { return centered_; }
  bool is_exact_stable() const { return std::holds_alternative<ExactStable>(kind_); }
  /// Shift subtracted from every raw ParetoMix draw (0 for ExactStable).
  double mean_offset() const { return offset_; }
  /// c+ - c- for ParetoMix, beta for ExactStable.
  double skewness() const;
  std::string describe() const;

  double sample(RngStream& rng) const;
  std::complex<double> charfn(double t) const;

  /// -log |phi(t)|, evaluated without cancellation for small t.
  double log_modulus(double t) const;

  /// The declared non-lattice and Cramer conditions (recorded, not verified).
  bool declared_non_lattice() const { return true; }
  bool declared_cramer() const { return true; }

 private:
  InnovationModel(Kind kind, bool centered, double offset)
      : kind_(std::move(kind)), centered_(centered), offset_(offset) {}

  Kind kind_;
  bool centered_ = true;
  double offset_ = 0.0;
};

/// Slowly varying function matching the innovation's truncated second moment:
/// ParetoCanonical(alpha) for ParetoMix, Constant(1) for ExactStable.
SlowVary canonical_L(const InnovationModel& model);

struct CAlphaEstimate {
  double value = 0.0;
  double error = 0.0;             // spread of the last two extrapolants
  std::vector<double> raw;        // -log|phi(t)| / (t^alpha L(1/t)) per grid point
  std::vector<double> extrapolated;
};

/// Richardson-extrapolated limit of -log|phi(t)| / (t^alpha L(1/t)) as t
/// decreases along t_grid (strictly decreasing, positive). An empty grid
/// means {1e-1, 1e-2, 1e-3, 1e-4}.
CAlphaEstimate estimate_c_alpha(const InnovationModel& model, std::span<const double> t_grid = {});

}  // namespace stablefield
