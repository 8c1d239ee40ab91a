#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "stablefield/coeffs.hpp"
#include "stablefield/error.hpp"

using namespace stablefield;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

double farima_axis_gamma(double beta, Index j) {
  return std::exp(std::lgamma(j + beta) - std::lgamma(beta) - std::lgamma(j + 1.0));
}

}  // namespace

TEST_CASE("coeff examples") {
  const auto geo = CoefficientModel::doubly_geometric(0.5, 0.5);
  CHECK(geo.coeff(Point{2, 1}) == doctest::Approx(0.125));
  CHECK(geo.coeff(Point{-1, 1}) == 0.0);
  const auto far = CoefficientModel::farima({0.3, 0.4});
  CHECK(far.axis_factor(0, 1) == doctest::Approx(std::tgamma(1.3) / std::tgamma(0.3)));
  CHECK(far.axis_factor(0, 1) == doctest::Approx(0.3));
  CHECK(far.coeff(Point{0, 0}) == 1.0);
  const auto iso = CoefficientModel::isotropic(2.0, 2, 1.0);
  CHECK(iso.coeff(Point{3, 4}) == doctest::Approx(0.04));
  CHECK(iso.coeff(Point{0, 0}) == 1.0);
  CHECK(CoefficientModel::isotropic(2.0, 2, 7.0).coeff(Point{0, 0}) == 7.0);
  const auto an = CoefficientModel::anisotropic({1.0, 2.0}, 1.2);
  CHECK(an.coeff(Point{-2, 3}) == doctest::Approx(std::pow(2.0 + 9.0, -1.2)));
  const auto fin = CoefficientModel::finite(1, {{{0}, 1.0}, {{3}, -2.0}});
  CHECK(fin.coeff(Point{3}) == -2.0);
  CHECK(fin.coeff(Point{2}) == 0.0);
}

TEST_CASE("coeff rejects wrong dimension") {
  CHECK(code_of([] { CoefficientModel::doubly_geometric(0.5, 0.5).coeff(Point{1}); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { CoefficientModel::finite(2, {{{0, 0}, 1.0}, {{0, 0}, 2.0}}); }) == ErrorCode::kValidation);
  CHECK(code_of([] { CoefficientModel::doubly_geometric(1.0, 0.5); }) == ErrorCode::kValidation);
}

TEST_CASE("farima recurrence matches the gamma form") {
  const auto far = CoefficientModel::farima({0.3, 0.45});
  const auto table = far.axis_table(1, 400);
  for (Index j = 0; j <= 400; j += 7) {
    CHECK(table[static_cast<std::size_t>(j)] == doctest::Approx(farima_axis_gamma(0.45, j)).epsilon(1e-12));
    CHECK(far.axis_factor(1, j) == doctest::Approx(farima_axis_gamma(0.45, j)).epsilon(1e-12));
  }
}

TEST_CASE("property: farima asymptotic constant") {
  const double b1 = 0.3, b2 = 0.2;
  const auto far = CoefficientModel::farima({b1, b2});
  const Index j = 10000;
  const double ratio = far.coeff(Point{j, j}) / (std::pow(j, b1 - 1.0) * std::pow(j, b2 - 1.0));
  CHECK(ratio == doctest::Approx(1.0 / (std::tgamma(b1) * std::tgamma(b2))).epsilon(0.02));
}

TEST_CASE("existence checks") {
  CHECK_NOTHROW(CoefficientModel::isotropic(1.5, 2).check_existence(1.8));
  CHECK(code_of([] { CoefficientModel::isotropic(1.0, 2).check_existence(1.5); }) == ErrorCode::kModelInvalid);
  CHECK(code_of([] { CoefficientModel::farima({0.5, 0.1}).check_existence(1.5); }) == ErrorCode::kModelInvalid);
  CHECK(code_of([] { CoefficientModel::anisotropic({1.0, 2.0}, 0.5).check_existence(1.8); }) ==
        ErrorCode::kModelInvalid);
  CHECK_NOTHROW(CoefficientModel::anisotropic({1.0, 2.0}, 1.2).check_existence(1.8));
  try {
    CoefficientModel::isotropic(1.0, 2).check_existence(1.5);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("is not > d") != std::string::npos);
  }
}

TEST_CASE("summability report examples") {
  const auto one = SlowVary::constant(1.0);
  const auto iso = summability_report(CoefficientModel::isotropic(1.5, 2), 1.8, one);
  CHECK_FALSE(iso.ell1_finite);
  CHECK(iso.alpha_sum > 0.0);

  const auto geo = summability_report(CoefficientModel::doubly_geometric(0.5, 0.5), 1.0, one);
  CHECK(geo.ell1_finite);
  CHECK(geo.alpha_sum == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(geo.alpha_sum + geo.tail_bound >= 4.0 * (1.0 - 1e-14));

  const auto L = SlowVary::pareto_canonical(1.5);
  const auto fin = summability_report(CoefficientModel::finite(2, {{{0, 0}, 1.0}}), 1.5, L);
  CHECK(fin.alpha_sum == doctest::Approx(L(1.0)));
  CHECK(fin.tail_bound == 0.0);

  CHECK(CoefficientModel::isotropic(2.5, 2).ell1_finite());
  CHECK_FALSE(CoefficientModel::farima({0.3, 0.3}).ell1_finite());
  CHECK(code_of([] { summability_report(CoefficientModel::farima({0.5, 0.5}), 1.5, SlowVary::constant(1.0)); }) ==
        ErrorCode::kModelInvalid);
}

TEST_CASE("property: truncated sums grow with the window and respect the tail bound") {
  const auto one = SlowVary::constant(1.0);
  const std::vector<std::pair<CoefficientModel, double>> cases = {
      {CoefficientModel::doubly_geometric(0.5, -0.7), 1.5},
      {CoefficientModel::farima({0.2, 0.1}), 1.8},
      {CoefficientModel::isotropic(1.5, 2), 1.8},
      {CoefficientModel::anisotropic({1.0, 2.0}, 1.2), 1.8},
  };
  for (const auto& [model, alpha] : cases) {
    double previous = 0.0;
    for (Index M : {2, 4, 8, 16, 32}) {
      const Index margin[] = {M, M};
      const double s = windowed_power_sum(model, alpha, nullptr, margin);
      CHECK(s >= previous);
      previous = s;
    }
    for (Index M : {3, 6, 12}) {
      const Index small[] = {M, M};
      const Index big[] = {40 * M, 40 * M};
      const double gap = windowed_power_sum(model, alpha, nullptr, big) - windowed_power_sum(model, alpha, nullptr, small);
      CHECK(gap <= model.tail_bound(alpha, nullptr, small) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("property: finite truncated sums equal brute force") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> idx(-4, 4);
  std::normal_distribution<double> val(0.0, 1.0);
  const auto L = SlowVary::pareto_canonical(1.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<Point, double>> entries;
    std::set<Point> used;
    for (int k = 0; k < 10; ++k) {
      Point p{idx(gen), idx(gen)};
      if (used.insert(p).second) entries.emplace_back(p, val(gen));
    }
    const auto model = CoefficientModel::finite(2, entries);
    double brute = 0.0;
    for (const auto& [p, a] : entries) {
      if (std::abs(p[0]) <= 2 && std::abs(p[1]) <= 3) brute += std::pow(std::fabs(a), 1.3) * L(1.0 / std::fabs(a));
    }
    const Index margin[] = {2, 3};
    CHECK(windowed_power_sum(model, 1.3, &L, margin) == doctest::Approx(brute).epsilon(1e-13));
  }
}

TEST_CASE("window meets the requested tolerance") {
  const auto model = CoefficientModel::isotropic(1.5, 2);
  const auto margin = model.window(1.8, nullptr, 0.05, 100000);
  CHECK(model.tail_bound(1.8, nullptr, margin) <= 0.05);
  const auto capped = model.window(1.8, nullptr, 1e-3, 1000);
  CHECK(capped == std::vector<Index>{1000, 1000});
  const auto fin = CoefficientModel::finite(2, {{{-3, 1}, 1.0}, {{2, 5}, 1.0}});
  CHECK(fin.window(1.0, nullptr, 1e-6, 10) == std::vector<Index>{3, 5});
}
