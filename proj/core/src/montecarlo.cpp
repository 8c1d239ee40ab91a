#include "stablefield/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stablefield/error.hpp"
#include "stablefield/parallel.hpp"
#include "stablefield/rng.hpp"

namespace stablefield {
namespace {

template <class Draw>
void run_replicates(const std::vector<double>& weights, const SimPlan& plan, std::vector<double>& sums,
                    const Draw& draw) {
  parallel_for(
      plan.replicates, worker_count(plan.threads),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
          RngStream rng(plan.master_seed, r);
          double s = 0.0;
          for (double b : weights) s += b * draw(rng);
          sums[r] = s;
        }
      },
      16);
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

SimResult simulate(const SimPlan& plan) {
  if (plan.field == nullptr) fail(ErrorCode::kValidation, "simulation plan has no weight field");
  if (plan.replicates == 0) fail(ErrorCode::kValidation, "replicates must be >= 1");
  if (!(plan.B_n > 0.0)) fail(ErrorCode::kDomain, "B_n must be positive");
  const double relative_tail = plan.field->relative_tail(plan.B_n, plan.innovations.alpha(), canonical_L(plan.innovations));
  if (relative_tail > plan.max_relative_tail) {
    std::ostringstream msg;
    msg << "weight field omits up to " << relative_tail << " of the normalized energy (limit "
        << plan.max_relative_tail << "); lower eps_tail";
    fail(ErrorCode::kValidation, msg.str());
  }

  const std::vector<double> weights = plan.field->nonzero_values();
  std::vector<double> sums(plan.replicates, 0.0);
  if (!weights.empty()) {
    const auto& kind = plan.innovations.kind();
    if (const auto* s = std::get_if<InnovationModel::ExactStable>(&kind)) {
      const StableLaw law = s->law;
      run_replicates(weights, plan, sums, [&law](RngStream& rng) { return law.sample(rng); });
    } else {
      const auto& p = std::get<InnovationModel::ParetoMix>(kind);
      const double c_plus = p.c_plus;
      const double exponent = -1.0 / p.alpha;
      const double offset = plan.innovations.mean_offset();
      run_replicates(weights, plan, sums, [=](RngStream& rng) {
        const double sign = rng.uniform_open() < c_plus ? 1.0 : -1.0;
        return sign * std::pow(rng.uniform_open(), exponent) - offset;
      });
    }
  }

  SimResult out;
  out.B_n = plan.B_n;
  out.samples.reserve(sums.size());
  for (std::size_t r = 0; r < sums.size(); ++r) {
    if (std::isfinite(sums[r])) {
      out.samples.push_back(sums[r] / plan.B_n);
    } else {
      out.excluded.push_back(r);
    }
  }
  return out;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf, std::size_t threads) {
  if (samples.size() < 2) fail(ErrorCode::kValidation, "KS distance needs at least two samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> F(sorted.size());
  parallel_for(
      sorted.size(), worker_count(threads),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          F[i] = (i > 0 && sorted[i] == sorted[i - 1]) ? std::nan("") : cdf(sorted[i]);
        }
      },
      256);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (std::isnan(F[i])) F[i] = last;  // repeated sample point
    last = F[i];
    d = std::max({d, static_cast<double>(i + 1) / n - F[i], F[i] - static_cast<double>(i) / n});
  }
  return d;
}

double ks_against(std::span<const double> samples, const StableLimitLaw& law, std::size_t threads) {
  return ks_distance(samples, [&law](double x) { return law.cdf(x); }, threads);
}

TestFunction TestFunction::tent() {
  TestFunction m;
  m.kind_ = Kind::kTent;
  m.integral_ = 1.0;
  m.name_ = "tent";
  return m;
}

TestFunction TestFunction::smoothed_box(double half_width, double ramp) {
  if (!(half_width >= 0.0) || !(ramp > 0.0)) fail(ErrorCode::kDomain, "smoothed box needs half_width >= 0 and ramp > 0");
  TestFunction m;
  m.kind_ = Kind::kBox;
  m.half_width_ = half_width;
  m.ramp_ = ramp;
  m.integral_ = 2.0 * half_width + ramp;
  std::ostringstream name;
  name << "box(" << half_width << "," << ramp << ")";
  m.name_ = name.str();
  return m;
}

TestFunction TestFunction::tabulated(std::vector<double> x, std::vector<double> y) {
  if (x.size() < 2 || x.size() != y.size()) fail(ErrorCode::kValidation, "tabulated m needs matching x, y with >= 2 points");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) fail(ErrorCode::kValidation, "tabulated m must be finite");
    if (k > 0 && !(x[k] > x[k - 1])) fail(ErrorCode::kValidation, "tabulated m grid must be increasing");
  }
  TestFunction m;
  m.kind_ = Kind::kTable;
  m.integral_ = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) m.integral_ += 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
  m.x_ = std::move(x);
  m.y_ = std::move(y);
  m.name_ = "tabulated";
  return m;
}

double TestFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::kTent:
      return std::max(0.0, 1.0 - std::fabs(x));
    case Kind::kBox: {
      const double a = std::fabs(x);
      if (a <= half_width_) return 1.0;
      return std::max(0.0, 1.0 - (a - half_width_) / ramp_);
    }
    case Kind::kTable: {
      if (!(x >= x_.front() && x <= x_.back())) return 0.0;
      const auto it = std::upper_bound(x_.begin(), x_.end(), x);
      if (it == x_.end()) return y_.back();
      const std::size_t k = static_cast<std::size_t>(it - x_.begin());
      const double w = (x - x_[k - 1]) / (x_[k] - x_[k - 1]);
      return (1.0 - w) * y_[k - 1] + w * y_[k];
    }
  }
  return 0.0;
}

std::vector<LltRow> llt_estimate(const SimResult& result, const TestFunction& m, std::span<const double> u_list,
                                 const StableLimitLaw& law) {
  if (result.samples.size() < 2) fail(ErrorCode::kValidation, "LLT estimate needs at least two samples");
  const double B = result.B_n;
  const double R = static_cast<double>(result.samples.size());
  std::vector<LltRow> rows;
  std::vector<double> values(result.samples.size());
  for (double u : u_list) {
    for (std::size_t r = 0; r < values.size(); ++r) values[r] = m(B * result.samples[r] + u);
    const double mean = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (R - 1.0));
    rows.push_back({u, m.name(), B * mean, law.pdf(-u / B) * m.integral(), B * sd / std::sqrt(R)});
  }
  return rows;
}

IntervalRow interval_prob(const SimResult& result, double a, double b, const StableLimitLaw& law) {
  if (!(a < b)) fail(ErrorCode::kDomain, "interval needs a < b");
  if (result.samples.empty()) fail(ErrorCode::kValidation, "interval estimate needs samples");
  const double B = result.B_n;
  const double R = static_cast<double>(result.samples.size());
  std::size_t count = 0;
  for (double s : result.samples) {
    const double x = B * s;
    if (a < x && x <= b) ++count;
  }
  const double p = static_cast<double>(count) / R;
  // p floored at 1/R so an empty interval still reports a positive error.
  const double q = std::max(p, 1.0 / R);
  IntervalRow row{a, b, B * p, law.pdf(0.0) * (b - a), B * std::sqrt(q * (1.0 - q) / R), false};
  row.noisy = row.std_err > row.estimate;
  return row;
}

}  // namespace stablefield
