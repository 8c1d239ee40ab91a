#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "stablefield/error.hpp"
#include "stablefield/montecarlo.hpp"
#include "stablefield/normalizer.hpp"

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

SimResult run(const WeightField& field, const InnovationModel& innovations, double B, std::size_t R,
              std::uint64_t seed, std::size_t threads = 0) {
  SimPlan plan;
  plan.field = &field;
  plan.innovations = innovations;
  plan.B_n = B;
  plan.replicates = R;
  plan.master_seed = seed;
  plan.threads = threads;
  return simulate(plan);
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("finite identity coefficients reproduce the base law") {
  const StableLaw base(1.2, 1.3, 0.5);
  const auto model = InnovationModel::exact_stable(base);
  const auto region = RegionUnion({Rect{{1}, {8}}});
  const SlowVary one = SlowVary::constant(1.0);
  const auto field = build_weights(CoefficientModel::finite(1, {{{0}, 1.0}}), region, 1.2, one);
  CHECK(field.nonzero_count() == 8);
  const auto solved = solve_Bn(field, 1.2, one);
  CHECK(solved.B_n == doctest::Approx(std::pow(8.0, 1.0 / 1.2)).epsilon(1e-9));
  const auto result = run(field, model, solved.B_n, 100000, 7);
  CHECK(result.samples.size() == 100000);
  CHECK(ks_against(result.samples, limit_law(solved.c_hat, 1.2, 1.3, 0.5)) < 0.01);
}

TEST_CASE("degenerate and gaussian fields") {
  const auto zero = WeightField::from_values({0.0, 0.0, 0.0});
  const auto z = run(zero, InnovationModel::exact_stable(StableLaw(1.5)), 1.0, 1000, 1);
  CHECK(std::all_of(z.samples.begin(), z.samples.end(), [](double v) { return v == 0.0; }));
  CHECK(ks_against(z.samples, StableLimitLaw(1.0, StableLaw(1.5))) >= 0.5);

  const auto pair = WeightField::from_values({1.0, 1.0});
  const auto g = run(pair, InnovationModel::exact_stable(StableLaw(2.0)), std::sqrt(2.0), 100000, 2);
  double ss = 0.0;
  for (double v : g.samples) ss += v * v;
  CHECK(std::sqrt(ss / static_cast<double>(g.samples.size())) == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("ks examples") {
  const StableLaw law(1.5);
  RngStream rng(11);
  std::vector<double> x(100000);
  for (auto& v : x) v = law.sample(rng);
  CHECK(ks_against(x, StableLimitLaw(1.0, law)) < 1.63 / std::sqrt(1e5) * 1.5);
  CHECK(code_of([] { ks_distance(std::vector<double>{1.0}, [](double) { return 0.5; }); }) == ErrorCode::kValidation);

  const auto field = WeightField::from_values({1.0, -0.5, 0.25, 2.0});
  const auto model = InnovationModel::exact_stable(law);
  const double B = solve_Bn(field, 1.5, SlowVary::constant(1.0)).B_n;
  const auto limit = limit_law(solve_Bn(field, 1.5, SlowVary::constant(1.0)).c_hat, 1.5, 1.0, 0.0);
  const double k1 = ks_against(run(field, model, B, 100000, 1).samples, limit);
  const double k2 = ks_against(run(field, model, B, 100000, 2).samples, limit);
  CHECK(std::fabs(k1 - k2) < 0.01);
}

TEST_CASE("property: results do not depend on the worker count") {
  const auto field = build_weights(CoefficientModel::doubly_geometric(0.5, 0.5), regions::cube(2, 6), 1.5,
                                   canonical_L(InnovationModel::pareto_mix(1.5, 0.7)));
  for (const auto& model : {InnovationModel::pareto_mix(1.5, 0.7), InnovationModel::exact_stable(StableLaw(1.5, 1.0, 0.3))}) {
    const auto a = run(field, model, 50.0, 3000, 42, 1);
    const auto b = run(field, model, 50.0, 3000, 42, 8);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(double)) == 0);
    const auto c = run(field, model, 50.0, 3000, 43, 8);
    CHECK(std::memcmp(a.samples.data(), c.samples.data(), a.samples.size() * sizeof(double)) != 0);
  }
}

TEST_CASE("property: exact stable sums match the one-draw representation") {
  // 10^5 per side: at 10^4 the expected two-sample distance is already about 0.012.
  const std::size_t R = 100000;
  const StableLaw law(1.5);
  const auto field = build_weights(CoefficientModel::geometric({0.6}), regions::cube(1, 20), 1.5, SlowVary::constant(1.0));
  double power = 0.0;
  for (double b : field.nonzero_values()) power += std::pow(std::fabs(b), 1.5);
  const double scale = std::pow(power, 1.0 / 1.5);
  const auto direct = run(field, InnovationModel::exact_stable(law), scale, R, 5);
  std::vector<double> one_draw(R);
  RngStream rng(6);
  for (auto& v : one_draw) v = law.sample(rng);
  CHECK(two_sample_ks(direct.samples, one_draw) < 1.63 * std::sqrt(2.0 / R));
}

TEST_CASE("llt and interval estimates, iid exact stable") {
  const StableLaw law(1.5);
  const auto field = WeightField::from_values(std::vector<double>(16, 1.0));
  const double B = std::pow(16.0, 1.0 / 1.5);
  const auto result = run(field, InnovationModel::exact_stable(law), B, 100000, 9);
  const StableLimitLaw limit(1.0, law);
  const double u_list[] = {0.0, B / 2.0, B};
  const auto rows = llt_estimate(result, TestFunction::tent(), u_list, limit);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].target == doctest::Approx(law.pdf(0.0)));
  CHECK(rows[2].target == doctest::Approx(law.pdf(-1.0)));
  for (const auto& r : rows) CHECK(std::fabs(r.estimate - r.target) < 3.0 * r.std_err);

  const auto full = interval_prob(result, -1.0, 1.0, limit);
  CHECK(full.target == doctest::Approx(2.0 * law.pdf(0.0)));
  CHECK(std::fabs(full.estimate - full.target) < 3.0 * full.std_err);
  CHECK_FALSE(full.noisy);

  const auto left = interval_prob(result, -1.0, 0.0, limit);
  const auto right = interval_prob(result, 0.0, 1.0, limit);
  CHECK(std::fabs(left.estimate - right.estimate) < 3.0 * std::hypot(left.std_err, right.std_err));

  const auto thin = interval_prob(result, 0.0, 1e-6, limit);
  CHECK(thin.noisy);
  CHECK(code_of([&] { interval_prob(result, 1.0, 1.0, limit); }) == ErrorCode::kDomain);
}

TEST_CASE("llt on a zero field") {
  const auto zero = WeightField::from_values({0.0});
  SimResult result = run(zero, InnovationModel::exact_stable(StableLaw(1.5)), 3.0, 100, 1);
  const double u_list[] = {0.5, 3.0};
  const auto rows = llt_estimate(result, TestFunction::tent(), u_list, StableLimitLaw(1.0, StableLaw(1.5)));
  CHECK(rows[0].estimate == doctest::Approx(3.0 * 0.5));
  CHECK(rows[0].std_err == 0.0);
  CHECK(rows[1].estimate == 0.0);
}

TEST_CASE("test functions") {
  const auto tent = TestFunction::tent();
  CHECK(tent(0.0) == 1.0);
  CHECK(tent(0.5) == 0.5);
  CHECK(tent(-2.0) == 0.0);
  const auto box = TestFunction::smoothed_box(0.5, 1.0);
  CHECK(box(0.4) == 1.0);
  CHECK(box(1.0) == 0.5);
  CHECK(box(1.6) == 0.0);
  CHECK(box.integral() == 2.0);
  const auto tab = TestFunction::tabulated({-1.0, 0.0, 2.0}, {0.0, 2.0, 0.0});
  CHECK(tab(1.0) == 1.0);
  CHECK(tab(3.0) == 0.0);
  CHECK(tab.integral() == 3.0);
  // Integrals against a fine Riemann sum.
  for (const auto& m : {tent, box, tab}) {
    double s = 0.0;
    for (int k = -400000; k < 400000; ++k) s += m((k + 0.5) * 1e-5);
    CHECK(s * 1e-5 == doctest::Approx(m.integral()).epsilon(1e-8));
  }
  CHECK(code_of([] { TestFunction::smoothed_box(1.0, 0.0); }) == ErrorCode::kDomain);
  CHECK(code_of([] { TestFunction::tabulated({0.0, 0.0}, {1.0, 1.0}); }) == ErrorCode::kValidation);
}

TEST_CASE("simulation plan errors and exclusions") {
  SimPlan plan;
  CHECK(code_of([&] { simulate(plan); }) == ErrorCode::kValidation);
  const auto field = WeightField::from_values({1.0});
  plan.field = &field;
  plan.replicates = 0;
  CHECK(code_of([&] { simulate(plan); }) == ErrorCode::kValidation);
  plan.replicates = 10;
  plan.B_n = 0.0;
  CHECK(code_of([&] { simulate(plan); }) == ErrorCode::kDomain);

  const WeightField leaky(Rect{{0}, {0}}, {1.0}, 0.5);
  plan.field = &leaky;
  plan.B_n = 1.0;
  CHECK(code_of([&] { simulate(plan); }) == ErrorCode::kValidation);

  const auto huge = WeightField::from_values({1e300, 1e300});
  const auto r = run(huge, InnovationModel::pareto_mix(0.3, 0.5), 1.0, 2000, 3);
  CHECK_FALSE(r.excluded.empty());
  CHECK(r.excluded.size() + r.samples.size() == 2000);
  CHECK(std::all_of(r.samples.begin(), r.samples.end(), [](double v) { return std::isfinite(v); }));
}

TEST_CASE("sample file round trip") {
  const auto path = temp_file("stablefield_test_samples.bin");
  SampleFile out{3.5, 1.5, {0.0, -1.25, 1e300, 4.9e-324}};
  write_sample_file(path.string(), out);
  CHECK(std::filesystem::file_size(path) == 8 + 4 + 4 + 8 + 8 + 8 + 4 * 8);
  const auto in = read_sample_file(path.string());
  CHECK(in.B_n == 3.5);
  CHECK(in.alpha == 1.5);
  REQUIRE(in.samples.size() == out.samples.size());
  CHECK(std::memcmp(in.samples.data(), out.samples.data(), out.samples.size() * sizeof(double)) == 0);

  std::ifstream raw(path, std::ios::binary);
  char magic[8];
  raw.read(magic, 8);
  CHECK(std::string(magic, 8) == "SFSAMPLE");
  raw.close();

  std::ofstream(path, std::ios::binary) << "NOTASAMPLEFILE__________________";
  CHECK(code_of([&] { read_sample_file(path.string()); }) == ErrorCode::kIo);
  std::filesystem::remove(path);
  CHECK(code_of([&] { read_sample_file(path.string()); }) == ErrorCode::kIo);
}
