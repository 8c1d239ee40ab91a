#include "stablefield/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "stablefield/error.hpp"
#include "stablefield/parallel.hpp"

namespace stablefield {
namespace {

constexpr std::size_t kChunk = 1 << 16;

// Sum of term(b_i) in fixed chunks, so the rounding does not depend on the
// number of workers.
template <class Term>
double chunked_sum(std::span<const double> b, std::size_t workers, const Term& term) {
  const std::size_t chunks = (b.size() + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  auto body = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(b.size(), lo + kChunk);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += term(b[i]);
      partial[c] = s;
    }
  };
  if (chunks <= 1) {
    body(0, chunks);
  } else {
    parallel_for(chunks, workers, body, 1);
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

class SumEvaluator {
 public:
  SumEvaluator(std::span<const double> b, double alpha, const SlowVary& L, std::size_t workers)
      : b_(b), alpha_(alpha), L_(L), workers_(workers) {
    if (const auto* c = std::get_if<SlowVary::Constant>(&L.kind())) {
      constant_ = c->value;
      power_sum_ = chunked_sum(b_, workers_, [alpha](double v) { return v == 0.0 ? 0.0 : std::pow(std::fabs(v), alpha); });
    }
  }

  double operator()(double x) const {
    if (constant_ > 0.0) return constant_ * power_sum_ * std::pow(x, -alpha_);
    return chunked_sum(b_, workers_, [&](double v) { return weighted_term(L_, alpha_, v, x); });
  }

 private:
  std::span<const double> b_;
  double alpha_;
  const SlowVary& L_;
  std::size_t workers_;
  double constant_ = 0.0;
  double power_sum_ = 0.0;
};

void check_inputs(std::span<const double> b, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) fail(ErrorCode::kDomain, "alpha must lie in (0, 2]");
  if (b.empty()) fail(ErrorCode::kValidation, "weight field is empty");
  for (double v : b) {
    if (!std::isfinite(v)) fail(ErrorCode::kNumeric, "weight field has a non-finite entry");
  }
}

}  // namespace

double normalizing_sum(std::span<const double> b, double alpha, const SlowVary& L, double x) {
  if (!(x > 0.0)) fail(ErrorCode::kDomain, "scale must be positive");
  double total = 0.0;
  for (double v : b) total += weighted_term(L, alpha, v, x);
  return total;
}

NormalizerResult solve_Bn(const WeightField& field, double alpha, const SlowVary& L, const SolverOptions& options) {
  const auto b = field.nonzero_values();
  if (b.empty()) fail(ErrorCode::kValidation, "weight field has no nonzero entry");
  return solve_Bn(std::span<const double>(b), alpha, L, options);
}

NormalizerResult solve_Bn(std::span<const double> b, double alpha, const SlowVary& L, const SolverOptions& options) {
  check_inputs(b, alpha);
  if (!(options.tol > 0.0)) fail(ErrorCode::kDomain, "solver tolerance must be positive");
  const SumEvaluator F(b, alpha, L, worker_count(options.threads));

  NormalizerResult out;
  double lo = 1.0;
  double hi = 1.0;
  const double f1 = F(1.0);
  if (!std::isfinite(f1)) fail(ErrorCode::kNumeric, "normalizing sum is not finite at x = 1");
  if (f1 <= 1.0) {
    out.boundary = true;
  } else {
    bool bracketed = false;
    for (int k = 0; k < options.max_growth; ++k) {
      lo = hi;
      hi *= 4.0;
      ++out.iterations;
      if (F(hi) <= 1.0) {
        bracketed = true;
        break;
      }
    }
    if (!bracketed) {
      std::ostringstream msg;
      msg << "normalizing sum stays above 1 up to x = " << hi;
      fail(ErrorCode::kDivergence, msg.str());
    }

    // F must be nonincreasing for bisection to find the infimum.
    bool monotone = true;
    const int n = std::max(2, options.verify_points);
    double previous = f1;
    for (int j = 1; j < n && monotone; ++j) {
      const double x = std::pow(hi, static_cast<double>(j) / (n - 1));
      const double value = F(x);
      if (value > previous * (1.0 + 1e-12)) monotone = false;
      previous = value;
    }
    if (!monotone) {
      if (options.on_non_monotone == SolverOptions::OnNonMonotone::kThrow) {
        fail(ErrorCode::kSolver, "normalizing sum is not monotone; rerun with the grid-scan fallback");
      }
      out.grid_scan = true;
      const int m = 4096;
      double prev_x = 1.0;
      for (int j = 1; j < m; ++j) {
        const double x = std::pow(hi, static_cast<double>(j) / (m - 1));
        if (F(x) <= 1.0) {
          lo = prev_x;
          hi = x;
          break;
        }
        prev_x = x;
      }
    }

    while (hi - lo > options.tol * hi) {
      const double mid = 0.5 * (lo + hi);
      ++out.iterations;
      if (F(mid) <= 1.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }

  out.B_n = hi;
  out.residual = std::fabs(F(hi) - 1.0);
  const ConditionReport conditions = check_conditions(b, alpha, L, out.B_n);
  out.s_plus = conditions.S1;
  out.s_minus = conditions.S2;
  out.c_hat = std::clamp(conditions.S1, 0.0, 1.0);
  out.rho_n = conditions.A2;
  return out;
}

ConditionReport check_conditions(const WeightField& field, double alpha, const SlowVary& L, double B_n) {
  const auto b = field.nonzero_values();
  return check_conditions(std::span<const double>(b), alpha, L, B_n);
}

ConditionReport check_conditions(std::span<const double> b, double alpha, const SlowVary& L, double B_n) {
  check_inputs(b, alpha);
  if (!(B_n > 0.0)) fail(ErrorCode::kDomain, "B_n must be positive");
  ConditionReport out;
  for (double v : b) {
    const double term = weighted_term(L, alpha, v, B_n);
    if (v > 0.0) out.S1 += term;
    if (v < 0.0) out.S2 += term;
    out.A2 = std::max(out.A2, std::fabs(v) / B_n);
  }
  out.A1 = out.S1 + out.S2;
  return out;
}

StableLimitLaw limit_law(double c_hat, double alpha, double c_alpha, double beta) {
  return StableLimitLaw(c_hat, StableLaw(alpha, c_alpha, beta));
}

double default_growth_q(double alpha) {
  if (alpha > 1.0 && alpha < 2.0) return alpha / (alpha - 1.0) - 0.01;
  if (alpha == 2.0) return 2.0;
  return 16.0;
}

GrowthGate check_region_growth(std::size_t J, double B_n, double alpha, bool ell1_finite, double q,
                               bool throw_on_fail) {
  if (!(B_n > 0.0)) fail(ErrorCode::kDomain, "B_n must be positive");
  GrowthGate gate;
  gate.J = static_cast<double>(J);
  gate.q = q > 0.0 ? q : default_growth_q(alpha);
  gate.applies = !ell1_finite;
  const double log_b = std::log(B_n);
  gate.limit = std::pow(B_n, gate.q) / (log_b > 1.0 ? log_b : 1.0);
  gate.passes = !gate.applies || gate.J <= gate.limit;
  if (!gate.passes && throw_on_fail) {
    std::ostringstream msg;
    msg << "J_n = " << J << " exceeds B_n^q / log B_n = " << gate.limit << " (q = " << gate.q << ")";
    fail(ErrorCode::kGrowthGate, msg.str());
  }
  return gate;
}

}  // namespace stablefield
