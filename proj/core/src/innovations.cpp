#include "stablefield/innovations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "quadrature.hpp"
#include "stablefield/error.hpp"

namespace stablefield {
namespace {

using std::numbers::pi;

struct ParetoIntegrals {
  double D;  // alpha t^alpha int_t^inf (1 - cos u) u^(-alpha-1) du
  double E;  // alpha t^alpha int_t^inf sin u u^(-alpha-1) du
};

// For t > 0. The finite part [t, T] is integrated on geometric panels so
// the u^(1-alpha) behaviour near 0 is resolved; the oscillatory tail past T
// goes to Ooura's double-exponential Fourier rule after the shift u = T + s.
ParetoIntegrals pareto_integrals(double alpha, double t) {
  const double T = std::max(t, 2.0 * pi);
  detail::Quadrature one_minus_cos, sine;
  auto f_cos = [alpha](double u) {
    const double h = std::sin(0.5 * u);
    return 2.0 * h * h * std::pow(u, -alpha - 1.0);
  };
  auto f_sin = [alpha](double u) { return std::sin(u) * std::pow(u, -alpha - 1.0); };
  for (double lo = t; lo < T;) {
    const double hi = std::min(T, 2.0 * lo);
    detail::gauss_kronrod(f_cos, lo, hi, 1e-15, 1e-13, 20, one_minus_cos);
    detail::gauss_kronrod(f_sin, lo, hi, 1e-15, 1e-13, 20, sine);
    lo = hi;
  }

  static boost::math::quadrature::ooura_fourier_cos<double> cos_rule(1e-12);
  static boost::math::quadrature::ooura_fourier_sin<double> sin_rule(1e-12);
  auto weight = [alpha, T](double s) { return std::pow(s + T, -alpha - 1.0); };
  const double ic = cos_rule.integrate(weight, 1.0).first;
  const double is = sin_rule.integrate(weight, 1.0).first;
  // int_T^inf cos u w du and int_T^inf sin u w du via cos(T + s), sin(T + s).
  const double tail_cos = std::cos(T) * ic - std::sin(T) * is;
  const double tail_sin = std::sin(T) * ic + std::cos(T) * is;
  const double power_tail = std::pow(T, -alpha) / alpha;

  const double scale = alpha * std::pow(t, alpha);
  return {scale * (one_minus_cos.value + power_tail - tail_cos), scale * (sine.value + tail_sin)};
}

}  // namespace

InnovationModel InnovationModel::exact_stable(const StableLaw& law) {
  return InnovationModel(ExactStable{law}, true, 0.0);
}

InnovationModel InnovationModel::pareto_mix(double alpha, double c_plus, bool centered) {
  if (!(alpha > 0.0 && alpha < 2.0)) fail(ErrorCode::kDomain, "pareto-mix alpha must lie in (0, 2)");
  if (!(c_plus >= 0.0 && c_plus <= 1.0)) fail(ErrorCode::kDomain, "c_plus must lie in [0, 1]");
  if (alpha == 1.0 && c_plus != 0.5) {
    fail(ErrorCode::kConditionA, "alpha = 1 requires symmetric innovations (c_plus = 0.5)");
  }
  if (alpha > 1.0 && c_plus != 0.5 && !centered) {
    fail(ErrorCode::kConditionA, "1 < alpha <= 2 requires centered innovations");
  }
  const bool shift = centered && alpha > 1.0;
  const double offset = shift ? (2.0 * c_plus - 1.0) * alpha / (alpha - 1.0) : 0.0;
  return InnovationModel(ParetoMix{alpha, c_plus}, shift, offset);
}

double InnovationModel::alpha() const {
  if (const auto* s = std::get_if<ExactStable>(&kind_)) return s->law.alpha();
  return std::get<ParetoMix>(kind_).alpha;
}

double InnovationModel::skewness() const {
  if (const auto* s = std::get_if<ExactStable>(&kind_)) return s->law.beta();
  return 2.0 * std::get<ParetoMix>(kind_).c_plus - 1.0;
}

std::string InnovationModel::describe() const {
  std::ostringstream out;
  if (const auto* s = std::get_if<ExactStable>(&kind_)) {
    out << "exact_stable(alpha=" << s->law.alpha() << ",c_alpha=" << s->law.c_alpha() << ",beta=" << s->law.beta()
        << ")";
  } else {
    const auto& p = std::get<ParetoMix>(kind_);
    out << "pareto_mix(alpha=" << p.alpha << ",c_plus=" << p.c_plus << ",centered=" << (centered_ ? 1 : 0) << ")";
  }
  return out.str();
}

double InnovationModel::sample(RngStream& rng) const {
  if (const auto* s = std::get_if<ExactStable>(&kind_)) return s->law.sample(rng);
  const auto& p = std::get<ParetoMix>(kind_);
  const double sign = rng.uniform_open() < p.c_plus ? 1.0 : -1.0;
  return sign * std::pow(rng.uniform_open(), -1.0 / p.alpha) - offset_;
}

std::complex<double> InnovationModel::charfn(double t) const {
  if (const auto* s = std::get_if<ExactStable>(&kind_)) return s->law.charfn(t);
  if (t == 0.0) return {1.0, 0.0};
  const auto& p = std::get<ParetoMix>(kind_);
  const auto [D, E] = pareto_integrals(p.alpha, std::fabs(t));
  const double imag = (2.0 * p.c_plus - 1.0) * E * (t > 0.0 ? 1.0 : -1.0);
  return std::complex<double>(1.0 - D, imag) * std::polar(1.0, -t * offset_);
}

double InnovationModel::log_modulus(double t) const {
  if (const auto* s = std::get_if<ExactStable>(&kind_)) {
    return s->law.c_alpha() * std::pow(std::fabs(t), s->law.alpha());
  }
  if (t == 0.0) return 0.0;
  const auto& p = std::get<ParetoMix>(kind_);
  const auto [D, E] = pareto_integrals(p.alpha, std::fabs(t));
  const double I = (2.0 * p.c_plus - 1.0) * E;
  return -0.5 * std::log1p(-2.0 * D + D * D + I * I);
}

SlowVary canonical_L(const InnovationModel& model) {
  if (model.is_exact_stable()) return SlowVary::constant(1.0);
  return SlowVary::pareto_canonical(model.alpha());
}

CAlphaEstimate estimate_c_alpha(const InnovationModel& model, std::span<const double> t_grid) {
  static constexpr double kDefaultGrid[] = {1e-1, 1e-2, 1e-3, 1e-4};
  if (t_grid.empty()) t_grid = kDefaultGrid;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > 0.0) || (k > 0 && !(t_grid[k] < t_grid[k - 1]))) {
      fail(ErrorCode::kValidation, "t grid must be positive and strictly decreasing");
    }
  }
  const double alpha = model.alpha();
  const SlowVary L = canonical_L(model);
  CAlphaEstimate out;
  for (double t : t_grid) out.raw.push_back(model.log_modulus(t) / (std::pow(t, alpha) * L(1.0 / t)));
  if (out.raw.size() == 1 || model.is_exact_stable()) {
    out.value = out.raw.back();
    out.error = out.raw.size() > 1 ? std::fabs(out.raw.back() - out.raw[out.raw.size() - 2]) : 0.0;
    return out;
  }
  // Leading correction is O(t^kappa) with kappa = min(alpha, 2 - alpha).
  const double kappa = std::min(alpha, 2.0 - alpha);
  for (std::size_t k = 1; k < out.raw.size(); ++k) {
    const double rk = std::pow(t_grid[k - 1] / t_grid[k], kappa);
    out.extrapolated.push_back((rk * out.raw[k] - out.raw[k - 1]) / (rk - 1.0));
  }
  out.value = out.extrapolated.back();
  out.error = out.extrapolated.size() > 1
                  ? std::fabs(out.extrapolated.back() - out.extrapolated[out.extrapolated.size() - 2])
                  : std::fabs(out.extrapolated.back() - out.raw.back());
  if (!(out.value > 0.0) || !std::isfinite(out.value)) {
    fail(ErrorCode::kNumeric, "c_alpha extrapolation produced a non-positive value");
  }
  return out;
}

}  // namespace stablefield
