#pragma once

#include <complex>

#include "stablefield/rng.hpp"

namespace stablefield {

/// alpha-stable law with characteristic function
///   phi(t) = exp(-c |t|^alpha (1 - i beta tau(alpha, t))),
///   tau(alpha, t) = sgn(t) tan(pi alpha / 2)   (0 when alpha is 1 or 2).
class StableLaw {
 public:
  /// Throws domain_error for alpha outside (0, 2], c <= 0 or |beta| > 1,
  /// and validation_error for alpha = 1 with beta != 0.
  StableLaw(double alpha, double c_alpha = 1.0, double beta = 0.0);

  double alpha() const { return alpha_; }
  double c_alpha() const { return c_alpha_; }
  double beta() const { return beta_; }
  bool symmetric() const { return beta_ == 0.0 || alpha_ == 2.0; }

  double tau(double t) const;
  std::complex<double> charfn(double t) const;

  /// Density by Fourier inversion; numeric_error if the 1e-8 absolute
  /// target is missed.
  double pdf(double x) const;
  /// Distribution function by the Gil-Pelaez inversion formula.
  double cdf(double x) const;

  /// Chambers-Mallows-Stuck draw.
  double sample(RngStream& rng) const;

  /// Point beyond which c t^alpha exceeds 40 and the integrands are negligible.
  double cutoff() const { return t_star_; }

  friend bool operator==(const StableLaw&, const StableLaw&) = default;

 private:
  double alpha_;
  double c_alpha_;
  double beta_;
  double skew_;    // beta tan(pi alpha / 2), 0 when alpha is 1 or 2
  double t_star_;
  // Sampler constants.
  double scale_;   // c^(1/alpha)
  double shift_;   // arctan(skew) / alpha
  double factor_;  // (1 + skew^2)^(1 / (2 alpha))
};

/// Law of c^(1/alpha) S' - (1 - c)^(1/alpha) S'' with S', S'' i.i.d. from base.
class StableLimitLaw {
 public:
  StableLimitLaw(double c, StableLaw base);

  double c() const { return c_; }
  const StableLaw& base() const { return base_; }
  /// The same distribution written as a single stable law: skewness (2c - 1) beta.
  const StableLaw& reduced() const { return reduced_; }

  std::complex<double> charfn(double t) const;
  double pdf(double x) const { return reduced_.pdf(x); }
  double cdf(double x) const { return reduced_.cdf(x); }
  double sample(RngStream& rng) const;

 private:
  double c_;
  StableLaw base_;
  StableLaw reduced_;
  double left_;   // c^(1/alpha)
  double right_;  // (1 - c)^(1/alpha)
};

}  // namespace stablefield
