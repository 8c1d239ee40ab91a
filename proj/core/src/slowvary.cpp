#include "stablefield/slowvary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stablefield/error.hpp"

namespace stablefield {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

SlowVary::SlowVary(Kind kind) : kind_(std::move(kind)) {
  std::visit(
      Overloaded{
          [&](const Constant&) { cutoff_ = 1.0; },
          [&](const ParetoCanonical& p) {
            if (p.alpha < 2.0) {
              cutoff_ = std::pow(2.0 / p.alpha, 1.0 / (2.0 - p.alpha));
            } else {
              cutoff_ = std::exp(0.5);
            }
          },
          [&](const LogPower&) { cutoff_ = std::exp(1.0); },
          [&](const Tabulated& t) { cutoff_ = std::max(1.0, t.grid.front()); },
      },
      kind_);
  frozen_value_ = evaluate_unfrozen(cutoff_);
}

SlowVary SlowVary::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorCode::kValidation, "constant slowly varying value must be positive and finite");
  }
  return SlowVary(Constant{value});
}

SlowVary SlowVary::pareto_canonical(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    fail(ErrorCode::kValidation, "pareto canonical L requires alpha in (0, 2]");
  }
  return SlowVary(ParetoCanonical{alpha});
}

SlowVary SlowVary::log_power(double exponent) {
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) {
    fail(ErrorCode::kValidation, "log-power exponent must be a nonnegative real");
  }
  return SlowVary(LogPower{exponent});
}

SlowVary SlowVary::tabulated(std::vector<double> grid, std::vector<double> values) {
  if (grid.empty() || grid.size() != values.size()) {
    fail(ErrorCode::kValidation, "tabulated L needs equally sized, nonempty grid and values");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || !(values[k] > 0.0) || !std::isfinite(grid[k]) ||
        !std::isfinite(values[k])) {
      fail(ErrorCode::kValidation, "tabulated L grid and values must be positive and finite");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      fail(ErrorCode::kValidation, "tabulated L grid must be strictly increasing");
    }
  }
  return SlowVary(Tabulated{std::move(grid), std::move(values)});
}

double SlowVary::evaluate_unfrozen(double x) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [x](const ParetoCanonical& p) {
            if (p.alpha < 2.0) return -std::expm1((p.alpha - 2.0) * std::log(x));
            return 2.0 * std::log(x);
          },
          [x](const LogPower& l) { return std::pow(std::max(1.0, std::log(x)), l.exponent); },
          [x](const Tabulated& t) {
            if (x <= t.grid.front()) return t.values.front();
            if (x >= t.grid.back()) return t.values.back();
            const auto it = std::upper_bound(t.grid.begin(), t.grid.end(), x);
            const auto hi = static_cast<std::size_t>(it - t.grid.begin());
            const std::size_t lo = hi - 1;
            const double w = (std::log(x) - std::log(t.grid[lo])) /
                             (std::log(t.grid[hi]) - std::log(t.grid[lo]));
            return t.values[lo] + w * (t.values[hi] - t.values[lo]);
          },
      },
      kind_);
}

double SlowVary::operator()(double x) const {
  if (!(x > 0.0)) {
    fail(ErrorCode::kDomain, "slowly varying function evaluated at non-positive x");
  }
  if (x < cutoff_) return frozen_value_;
  return evaluate_unfrozen(x);
}

double SlowVary::power_bound(double delta) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [&](const ParetoCanonical& p) {
            if (p.alpha < 2.0) return 1.0;
            // 2 ln x <= (2 / (e delta)) x^delta
            if (delta <= 0.0) return kInf;
            return std::max(frozen_value_, 2.0 / (delta * std::exp(1.0)));
          },
          [&](const LogPower& l) {
            if (l.exponent == 0.0) return 1.0;
            if (delta <= 0.0) return kInf;
            // (ln x)^e x^-delta peaks at ln x = e / delta
            const double peak = std::pow(l.exponent / delta, l.exponent) * std::exp(-l.exponent);
            return std::max(1.0, peak);
          },
          [](const Tabulated& t) { return *std::max_element(t.values.begin(), t.values.end()); },
      },
      kind_);
}

std::string SlowVary::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Constant& c) { out << "constant(" << c.value << ")"; },
                 [&](const ParetoCanonical& p) { out << "pareto_canonical(" << p.alpha << ")"; },
                 [&](const LogPower& l) { out << "log_power(" << l.exponent << ")"; },
                 [&](const Tabulated& t) { out << "tabulated(" << t.grid.size() << " points)"; },
             },
             kind_);
  return out.str();
}

bool operator==(const SlowVary& a, const SlowVary& b) {
  return std::visit(
      Overloaded{
          [](const SlowVary::Constant& x, const SlowVary::Constant& y) { return x.value == y.value; },
          [](const SlowVary::ParetoCanonical& x, const SlowVary::ParetoCanonical& y) {
            return x.alpha == y.alpha;
          },
          [](const SlowVary::LogPower& x, const SlowVary::LogPower& y) {
            return x.exponent == y.exponent;
          },
          [](const SlowVary::Tabulated& x, const SlowVary::Tabulated& y) {
            return x.grid == y.grid && x.values == y.values;
          },
          [](const auto&, const auto&) { return false; },
      },
      a.kind_, b.kind_);
}

double eval(const SlowVary& L, double x) { return L(x); }

double weighted_term(const SlowVary& L, double alpha, double b, double scale) {
  if (!(scale > 0.0)) fail(ErrorCode::kDomain, "weighted_term requires a positive scale");
  if (!(alpha > 0.0 && alpha <= 2.0)) fail(ErrorCode::kDomain, "weighted_term requires alpha in (0, 2]");
  if (b == 0.0) return 0.0;
  const double magnitude = std::fabs(b);
  return std::pow(magnitude / scale, alpha) * L(scale / magnitude);
}

}  // namespace stablefield
