#include "stablefield/stable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "quadrature.hpp"
#include "stablefield/error.hpp"

namespace stablefield {
namespace {

using std::numbers::pi;

constexpr double kEnvelope = 40.0;      // c t*^alpha
constexpr double kTarget = 1e-8;        // absolute error target for pdf and cdf
constexpr std::size_t kMaxPieces = 400000;

using detail::Quadrature;
using detail::gauss_kronrod;

// Integral of g over [lo, hi] split into pieces no longer than pi / omega,
// where omega bounds the local oscillation frequency of g.
template <class G, class Omega>
void add_segment(const G& g, double lo, double hi, const Omega& omega, Quadrature& acc) {
  if (!(hi > lo)) return;
  const double w = std::max(1.0, std::max(omega(lo), omega(hi)));
  const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) * w / pi));
  if (pieces > kMaxPieces) fail(ErrorCode::kNumeric, "inversion integrand oscillates too fast");
  const std::size_t n = std::max<std::size_t>(1, pieces);
  const double h = (hi - lo) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = lo + h * static_cast<double>(k);
    const double b = (k + 1 == n) ? hi : a + h;
    gauss_kronrod(g, a, b, 1e-13, 1e-14, 16, acc);
  }
}

// Heavy-tail series at z > 0 for the standardized law exp(-|t|^alpha (1 - i s sgn t)):
// with phi(t) = exp(-C t^alpha e^{-i theta}), t > 0,
//   f(z)     = (1/pi) Re sum_k (-C e^{-i theta})^k Gamma(k alpha + 1) / k! z^{-k alpha - 1} e^{-i pi (k alpha + 1)/2}
//   1 - F(z) = (1/pi) Re sum_k (-C e^{-i theta})^k Gamma(k alpha) / k! z^{-k alpha} e^{-i pi (k alpha + 1)/2}
// Convergent for alpha < 1 and asymptotic otherwise; accepted only when
// the smallest term is below tolerance.
bool tail_series(double alpha, double skew, double z, bool want_pdf, double& out) {
  const double C = std::hypot(1.0, skew);
  const double theta = std::atan(skew);
  const double lz = std::log(z);
  double sum = 0.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const double ka = k * alpha;
    const double log_mag = k * std::log(C) + (want_pdf ? std::lgamma(ka + 1.0) - (ka + 1.0) * lz
                                                       : std::lgamma(ka) - ka * lz) -
                           std::lgamma(k + 1.0);
    const double mag = std::exp(log_mag);
    const double phase = -k * theta - pi * (ka + 1.0) / 2.0 + (k % 2 ? pi : 0.0);
    const double term = mag * std::cos(phase) / pi;
    sum += term;
    if (mag / pi < 1e-16) {
      out = sum;
      return true;
    }
    if (mag > last && k > 2) return false;  // asymptotic series started to diverge
    last = mag;
  }
  return false;
}

}  // namespace

StableLaw::StableLaw(double alpha, double c_alpha, double beta)
    : alpha_(alpha), c_alpha_(c_alpha), beta_(beta) {
  if (!(alpha > 0.0 && alpha <= 2.0)) fail(ErrorCode::kDomain, "alpha must lie in (0, 2]");
  if (!(c_alpha > 0.0) || !std::isfinite(c_alpha)) fail(ErrorCode::kDomain, "c_alpha must be positive and finite");
  if (!(std::fabs(beta) <= 1.0)) fail(ErrorCode::kDomain, "beta must lie in [-1, 1]");
  if (alpha == 1.0 && beta != 0.0) {
    fail(ErrorCode::kValidation, "alpha = 1 requires beta = 0 (symmetric innovations)");
  }
  if (alpha == 2.0) beta_ = 0.0;
  skew_ = (alpha == 1.0 || alpha == 2.0) ? 0.0 : beta_ * std::tan(pi * alpha / 2.0);
  t_star_ = std::pow(kEnvelope / c_alpha_, 1.0 / alpha_);
  scale_ = std::pow(c_alpha_, 1.0 / alpha_);
  shift_ = std::atan(skew_) / alpha_;
  factor_ = std::pow(1.0 + skew_ * skew_, 1.0 / (2.0 * alpha_));
}

double StableLaw::tau(double t) const {
  if (alpha_ == 1.0 || alpha_ == 2.0 || t == 0.0) return 0.0;
  return (t > 0.0 ? 1.0 : -1.0) * std::tan(pi * alpha_ / 2.0);
}

std::complex<double> StableLaw::charfn(double t) const {
  if (t == 0.0) return {1.0, 0.0};
  const double m = c_alpha_ * std::pow(std::fabs(t), alpha_);
  const double phase = (t > 0.0 ? m : -m) * skew_;
  return std::polar(std::exp(-m), phase);
}

double StableLaw::pdf(double x) const {
  const double z = x / scale_;
  if (alpha_ == 2.0 && std::fabs(z) > 17.0) {
    // N(0, 2) beyond 12 standard deviations.
    return std::exp(-z * z / 4.0) / (2.0 * std::sqrt(pi) * scale_);
  }
  if (alpha_ < 2.0 && std::fabs(z) > (alpha_ < 1.0 ? 4.0 : 20.0)) {
    double value = 0.0;
    const double s = z > 0.0 ? skew_ : -skew_;
    if (tail_series(alpha_, s, std::fabs(z), true, value)) return std::max(0.0, value) / scale_;
  }

  const double a = alpha_;
  const double s = skew_;
  auto g = [&](double t) {
    const double ta = std::pow(t, a);
    return std::exp(-ta) * std::cos(s * ta - t * z);
  };
  auto omega = [&](double t) {
    return std::fabs(z) + (s == 0.0 || t == 0.0 ? 0.0 : std::fabs(s) * a * std::pow(t, a - 1.0));
  };
  const double upper = std::pow(kEnvelope, 1.0 / a);
  Quadrature acc;
  const int levels = a < 1.0 ? 40 : 12;
  double lo = upper * std::ldexp(1.0, -2 * levels);
  add_segment(g, 0.0, lo, [](double) { return 0.0; }, acc);
  for (int k = levels - 1; k >= 0; --k) {
    const double hi = upper * std::ldexp(1.0, -2 * k);
    add_segment(g, lo, hi, omega, acc);
    lo = hi;
  }
  if (acc.error / pi > kTarget) {
    std::ostringstream msg;
    msg << "pdf quadrature missed the error target at x = " << x << " (estimate " << acc.error / pi << ")";
    fail(ErrorCode::kNumeric, msg.str());
  }
  return std::max(0.0, acc.value / pi) / scale_;
}

double StableLaw::cdf(double x) const {
  const double z = x / scale_;
  if (symmetric() && z == 0.0) return 0.5;
  if (symmetric() && z < 0.0) return 1.0 - cdf(-x);
  if (alpha_ == 2.0 && std::fabs(z) > 17.0) {
    return z > 0.0 ? 1.0 - 0.5 * std::erfc(z / 2.0) : 0.5 * std::erfc(-z / 2.0);
  }
  if (alpha_ < 2.0 && std::fabs(z) > (alpha_ < 1.0 ? 4.0 : 20.0)) {
    double value = 0.0;
    const double s = z > 0.0 ? skew_ : -skew_;
    if (tail_series(alpha_, s, std::fabs(z), false, value)) {
      return std::clamp(z > 0.0 ? 1.0 - value : value, 0.0, 1.0);
    }
  }

  const double a = alpha_;
  const double s = skew_;
  auto g = [&](double t) {
    const double ta = std::pow(t, a);
    return std::exp(-ta) * std::sin(s * ta - t * z) / t;
  };
  auto omega = [&](double t) {
    return std::fabs(z) + (s == 0.0 || t == 0.0 ? 0.0 : std::fabs(s) * a * std::pow(t, a - 1.0));
  };
  const double upper = std::pow(kEnvelope, 1.0 / a);
  Quadrature acc;
  const int levels = a < 1.0 ? 40 : 12;
  double lo = upper * std::ldexp(1.0, -2 * levels);
  // Near zero the integrand is s t^(alpha-1) - z to leading order.
  acc.value += s * std::pow(lo, a) / a - z * lo;
  for (int k = levels - 1; k >= 0; --k) {
    const double hi = upper * std::ldexp(1.0, -2 * k);
    add_segment(g, lo, hi, omega, acc);
    lo = hi;
  }
  if (acc.error / pi > kTarget) {
    std::ostringstream msg;
    msg << "cdf quadrature missed the error target at x = " << x << " (estimate " << acc.error / pi << ")";
    fail(ErrorCode::kNumeric, msg.str());
  }
  return std::clamp(0.5 - acc.value / pi, 0.0, 1.0);
}

double StableLaw::sample(RngStream& rng) const {
  const double v = pi * (rng.uniform_open() - 0.5);
  if (alpha_ == 1.0) return scale_ * std::tan(v);
  const double w = rng.exponential();
  // Samorodnitsky-Taqqu S1 form, which is exactly the (c, beta, tau)
  // parameterization with scale c^(1/alpha).
  const double arg = alpha_ * (v + shift_);
  const double x = factor_ * std::sin(arg) / std::pow(std::cos(v), 1.0 / alpha_) *
                   std::pow(std::cos(v - arg) / w, (1.0 - alpha_) / alpha_);
  return scale_ * x;
}

StableLimitLaw::StableLimitLaw(double c, StableLaw base)
    : c_(c),
      base_(base),
      reduced_(base.alpha(), base.c_alpha(), base.alpha() == 1.0 ? 0.0 : (2.0 * c - 1.0) * base.beta()) {
  if (!(c >= 0.0 && c <= 1.0)) fail(ErrorCode::kDomain, "limit-law weight c must lie in [0, 1]");
  left_ = std::pow(c, 1.0 / base.alpha());
  right_ = std::pow(1.0 - c, 1.0 / base.alpha());
}

std::complex<double> StableLimitLaw::charfn(double t) const {
  return base_.charfn(left_ * t) * std::conj(base_.charfn(right_ * t));
}

double StableLimitLaw::sample(RngStream& rng) const {
  double x = 0.0;
  if (left_ > 0.0) x += left_ * base_.sample(rng);
  if (right_ > 0.0) x -= right_ * base_.sample(rng);
  return x;
}

}  // namespace stablefield
