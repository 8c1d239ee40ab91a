#pragma once

#include <cstddef>
#include <span>

#include "stablefield/slowvary.hpp"
#include "stablefield/stable.hpp"
#include "stablefield/weights.hpp"

namespace stablefield {

struct NormalizerResult {
  double B_n = 0.0;
  double residual = 0.0;  // |F(B_n) - 1|
  double s_plus = 0.0;
  double s_minus = 0.0;
  double c_hat = 0.0;     // s_plus, clamped to [0, 1]
  double rho_n = 0.0;
  bool boundary = false;  // F(1) <= 1, so B_n = 1
  bool grid_scan = false; // monotonicity check failed and the grid scan was used
  int iterations = 0;
};

struct SolverOptions {
  enum class OnNonMonotone { kGridScan, kThrow };

  double tol = 1e-10;        // relative bracket width
  int max_growth = 200;      // bracket grows by 4 per step from x = 1
  int verify_points = 32;    // log-grid monotonicity check
  OnNonMonotone on_non_monotone = OnNonMonotone::kGridScan;
  std::size_t threads = 0;
};

/// F(x) = sum_i (|b_i| / x)^alpha L(x / |b_i|).
double normalizing_sum(std::span<const double> b, double alpha, const SlowVary& L, double x);

/// Smallest x >= 1 with F(x) <= 1, by geometric bracketing and bisection.
/// Throws divergence_error when no bracket is found and solver_error for a
/// non-monotone F under OnNonMonotone::kThrow.
NormalizerResult solve_Bn(const WeightField& field, double alpha, const SlowVary& L,
                          const SolverOptions& options = {});
NormalizerResult solve_Bn(std::span<const double> b, double alpha, const SlowVary& L,
                          const SolverOptions& options = {});

struct ConditionReport {
  double A1 = 0.0;  // sum |c_i|^alpha L(1/|c_i|), c_i = b_i / B_n
  double A2 = 0.0;  // sup |c_i|
  double S1 = 0.0;  // part of A1 over c_i > 0
  double S2 = 0.0;  // part of A1 over c_i < 0
};

ConditionReport check_conditions(const WeightField& field, double alpha, const SlowVary& L, double B_n);
ConditionReport check_conditions(std::span<const double> b, double alpha, const SlowVary& L, double B_n);

/// Law of c^(1/alpha) S' - (1 - c)^(1/alpha) S'' with S', S'' ~ (c_alpha, beta).
StableLimitLaw limit_law(double c_hat, double alpha, double c_alpha, double beta);

/// Default conjugate exponent q for the region-growth gate: just below
/// alpha / (alpha - 1) for 1 < alpha < 2, 2 for alpha = 2 and 16 otherwise.
double default_growth_q(double alpha);

struct GrowthGate {
  double J = 0.0;
  double limit = 0.0;  // B^q / log B
  double q = 0.0;
  bool applies = false;  // only for non-summable coefficients
  bool passes = true;
};

/// Evaluates J <= B^q / log B. With throw_on_fail, a failing gate raises
/// growth_gate.
GrowthGate check_region_growth(std::size_t J, double B_n, double alpha, bool ell1_finite, double q = 0.0,
                               bool throw_on_fail = true);

}  // namespace stablefield
