#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stablefield/innovations.hpp"
#include "stablefield/stable.hpp"
#include "stablefield/weights.hpp"

namespace stablefield {

struct SimPlan {
  const WeightField* field = nullptr;
  InnovationModel innovations = InnovationModel::exact_stable(StableLaw(2.0));
  double B_n = 1.0;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;
  /// Refuse to run when the field's relative omitted energy exceeds this.
  double max_relative_tail = 1e-3;
};

struct SimResult {
  double B_n = 1.0;
  std::vector<double> samples;        // S_n / B_n of the finite replicates, in replicate order
  std::vector<std::size_t> excluded;  // replicates whose sum was not finite
};

/// Replicate r draws one innovation per nonzero weight, in box order, from
/// the stream seeded with stream_seed(master_seed, r). Results do not depend
/// on the number of workers.
SimResult simulate(const SimPlan& plan);

/// sup_x |ECDF(x) - F(x)| over the sample points.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf,
                   std::size_t threads = 0);
double ks_against(std::span<const double> samples, const StableLimitLaw& law, std::size_t threads = 0);

/// Bounded, compactly supported test function m with known integral.
class TestFunction {
 public:
  /// max(0, 1 - |x|), integral 1.
  static TestFunction tent();
  /// 1 on [-half_width, half_width], linear down to 0 over ramp on each side.
  static TestFunction smoothed_box(double half_width, double ramp);
  /// Linear interpolation of (x, y), zero outside [x.front(), x.back()].
  static TestFunction tabulated(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double integral() const { return integral_; }
  const std::string& name() const { return name_; }

 private:
  enum class Kind { kTent, kBox, kTable };
  Kind kind_ = Kind::kTent;
  double half_width_ = 0.0;
  double ramp_ = 1.0;
  std::vector<double> x_, y_;
  double integral_ = 1.0;
  std::string name_;
};

struct LltRow {
  double u = 0.0;
  std::string m;
  double estimate = 0.0;  // B_n mean(m(S_n + u))
  double target = 0.0;    // f(-u / B_n) * integral(m)
  double std_err = 0.0;
};

std::vector<LltRow> llt_estimate(const SimResult& result, const TestFunction& m, std::span<const double> u_list,
                                 const StableLimitLaw& law);

struct IntervalRow {
  double a = 0.0;
  double b = 0.0;
  double estimate = 0.0;  // B_n #{a < S_n <= b} / R
  double target = 0.0;    // f(0) (b - a)
  double std_err = 0.0;   // binomial, with the hit rate floored at 1/R
  bool noisy = false;     // std_err exceeds the estimate
};

IntervalRow interval_prob(const SimResult& result, double a, double b, const StableLimitLaw& law);

/// Binary sample file: magic "SFSAMPLE", u32 version, u32 reserved, u64 R,
/// f64 B_n, f64 alpha, then R f64 values; all little-endian.
struct SampleFile {
  double B_n = 0.0;
  double alpha = 0.0;
  std::vector<double> samples;
};

void write_sample_file(const std::string& path, const SampleFile& file);
SampleFile read_sample_file(const std::string& path);

}  // namespace stablefield
