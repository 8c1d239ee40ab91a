#include "stablefield/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "stablefield/error.hpp"
#include "stablefield/parallel.hpp"

namespace stablefield {
namespace {

std::vector<std::size_t> strides_of(const Rect& box) {
  const std::size_t d = box.dim();
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t l = d; l-- > 1;) {
    stride[l - 1] = stride[l] * static_cast<std::size_t>(box.upper[l] - box.lower[l] + 1);
  }
  return stride;
}

std::size_t box_points(const Rect& box, double limit) {
  double points = 1.0;
  for (std::size_t l = 0; l < box.dim(); ++l) points *= static_cast<double>(box.upper[l] - box.lower[l] + 1);
  if (points > limit) {
    fail(ErrorCode::kNumeric, "weight window has " + std::to_string(points) + " points, above the limit");
  }
  return static_cast<std::size_t>(points);
}

// Point at a row-major offset inside box.
void unflatten(const Rect& box, const std::vector<std::size_t>& stride, std::size_t offset, Point& out) {
  for (std::size_t l = 0; l < box.dim(); ++l) {
    out[l] = box.lower[l] + static_cast<Index>(offset / stride[l]);
    offset %= stride[l];
  }
}

constexpr double kWindowLimit = 6.0e7;

bool one_sided(const CoefficientModel& model) { return model.separable(); }

// Coefficient margins for the window around the region.
std::vector<Index> coefficient_margin(const CoefficientModel& model, const Rect& bbox, double alpha,
                                      const WeightOptions& options) {
  const std::size_t d = model.dim();
  if (options.margin_factor > 0.0) {
    std::vector<Index> margin(d);
    for (std::size_t l = 0; l < d; ++l) {
      const double side = static_cast<double>(bbox.upper[l] - bbox.lower[l] + 1);
      margin[l] = std::max<Index>(1, static_cast<Index>(std::ceil(options.margin_factor * side)));
    }
    return margin;
  }
  return model.window(alpha, nullptr, options.eps_tail, options.max_margin);
}

// f(i) = sum_{j=lo}^{hi} g(j - i) for one axis, smallest terms first.
std::vector<double> axis_sums(const std::vector<double>& g, Index lo, Index hi, Index wlo, Index whi) {
  std::vector<double> out(static_cast<std::size_t>(whi - wlo + 1), 0.0);
  for (Index i = wlo; i <= whi; ++i) {
    const Index top = hi - i;
    if (top < 0) continue;
    const Index bottom = std::max<Index>(lo - i, 0);
    double sum = 0.0;
    for (Index t = top; t >= bottom; --t) sum += g[static_cast<std::size_t>(t)];
    out[static_cast<std::size_t>(i - wlo)] = sum;
  }
  return out;
}

void build_separable(const CoefficientModel& model, const RegionUnion& region, const Rect& window,
                     std::vector<double>& values) {
  const std::size_t d = model.dim();
  const Rect bbox = region.bounding_box();
  std::vector<std::vector<double>> table(d);
  for (std::size_t l = 0; l < d; ++l) table[l] = model.axis_table(l, bbox.upper[l] - window.lower[l]);

  const auto stride = strides_of(window);
  for (const Rect& rect : region.rects()) {
    std::vector<std::vector<double>> f(d);
    for (std::size_t l = 0; l < d; ++l) {
      f[l] = axis_sums(table[l], rect.lower[l], rect.upper[l], window.lower[l], window.upper[l]);
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
      std::size_t rest = k;
      double product = 1.0;
      for (std::size_t l = 0; l < d && product != 0.0; ++l) {
        product *= f[l][rest / stride[l]];
        rest %= stride[l];
      }
      values[k] += product;
    }
  }
}

// Finite support: b_i = sum_k a_k 1{i + k in region}.
void build_finite(const CoefficientModel& model, const RegionUnion& region, const Rect& window,
                  std::vector<double>& values, std::size_t workers) {
  const auto& entries = std::get<CoefficientModel::Finite>(model.kind()).entries;
  const auto stride = strides_of(window);
  const std::size_t d = model.dim();
  parallel_for(values.size(), workers, [&](std::size_t begin, std::size_t end) {
    Point i(d), j(d);
    for (std::size_t k = begin; k < end; ++k) {
      unflatten(window, stride, k, i);
      double sum = 0.0;
      for (const auto& [offset, a] : entries) {
        for (std::size_t l = 0; l < d; ++l) j[l] = i[l] + offset[l];
        if (region.contains(j)) sum += a;
      }
      values[k] = sum;
    }
  });
}

// Brute force b_i = sum_{j in region} a_{j-i}.
void build_direct(const CoefficientModel& model, const RegionUnion& region, const Rect& window,
                  std::vector<double>& values, std::size_t workers) {
  const auto stride = strides_of(window);
  const std::size_t d = model.dim();
  parallel_for(values.size(), workers, [&](std::size_t begin, std::size_t end) {
    Point i(d), j(d), diff(d);
    for (std::size_t k = begin; k < end; ++k) {
      unflatten(window, stride, k, i);
      double sum = 0.0;
      for (const Rect& rect : region.rects()) {
        j = rect.lower;
        for (;;) {
          for (std::size_t l = 0; l < d; ++l) diff[l] = j[l] - i[l];
          sum += model.coeff(diff);
          std::size_t l = d;
          while (l-- > 0) {
            if (++j[l] <= rect.upper[l]) break;
            j[l] = rect.lower[l];
          }
          if (l == static_cast<std::size_t>(-1)) break;
        }
      }
      values[k] = sum;
    }
  });
}

// Summed-area table of a over all offsets j - i that can occur, then one
// 2^d-corner inclusion-exclusion per rectangle.
void build_summed_area(const CoefficientModel& model, const RegionUnion& region, const Rect& window,
                       std::vector<double>& values, std::size_t workers) {
  const std::size_t d = model.dim();
  const Rect bbox = region.bounding_box();
  Rect offsets{Point(d), Point(d)};
  for (std::size_t l = 0; l < d; ++l) {
    offsets.lower[l] = bbox.lower[l] - window.upper[l];
    offsets.upper[l] = bbox.upper[l] - window.lower[l];
  }
  const std::size_t count = box_points(offsets, 2.0 * kWindowLimit);
  const auto ostride = strides_of(offsets);
  std::vector<double> sat(count);
  parallel_for(count, workers, [&](std::size_t begin, std::size_t end) {
    Point k(d);
    for (std::size_t o = begin; o < end; ++o) {
      unflatten(offsets, ostride, o, k);
      sat[o] = model.coeff(k);
    }
  });
  for (std::size_t l = 0; l < d; ++l) {
    const std::size_t side = static_cast<std::size_t>(offsets.upper[l] - offsets.lower[l] + 1);
    const std::size_t s = ostride[l];
    // Every line along axis l starts at an offset whose axis-l coordinate is 0.
    const std::size_t lines = count / side;
    parallel_for(lines, workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t line = begin; line < end; ++line) {
        const std::size_t start = (line / s) * s * side + line % s;
        for (std::size_t t = 1; t < side; ++t) sat[start + t * s] += sat[start + (t - 1) * s];
      }
    });
  }

  const auto stride = strides_of(window);
  const std::size_t corners = std::size_t{1} << d;
  parallel_for(values.size(), workers, [&](std::size_t begin, std::size_t end) {
    Point i(d);
    for (std::size_t k = begin; k < end; ++k) {
      unflatten(window, stride, k, i);
      double sum = 0.0;
      for (const Rect& rect : region.rects()) {
        for (std::size_t mask = 0; mask < corners; ++mask) {
          std::size_t o = 0;
          bool inside = true;
          int sign = 1;
          for (std::size_t l = 0; l < d; ++l) {
            Index c;
            if (mask & (std::size_t{1} << l)) {
              c = rect.lower[l] - i[l] - 1;
              sign = -sign;
            } else {
              c = rect.upper[l] - i[l];
            }
            if (c < offsets.lower[l]) {
              inside = false;
              break;
            }
            o += static_cast<std::size_t>(c - offsets.lower[l]) * ostride[l];
          }
          if (inside) sum += sign * sat[o];
        }
      }
      values[k] = sum;
    }
  });
}

// Zero the smallest entries whose alpha-energy adds up to at most budget.
double drop_small_entries(std::vector<double>& values, double alpha, double budget) {
  std::vector<std::pair<double, std::size_t>> energy;
  energy.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] != 0.0) energy.emplace_back(std::pow(std::fabs(values[k]), alpha), k);
  }
  std::sort(energy.begin(), energy.end());
  double dropped = 0.0;
  for (const auto& [e, k] : energy) {
    if (dropped + e > budget) break;
    dropped += e;
    values[k] = 0.0;
  }
  return dropped;
}

}  // namespace

WeightField::WeightField(Rect box, std::vector<double> values, double tail_energy_bound)
    : box_(std::move(box)), values_(std::move(values)), tail_energy_bound_(tail_energy_bound) {
  if (box_.lower.size() != box_.upper.size()) fail(ErrorCode::kDimensionMismatch, "weight box corners differ in dimension");
  for (std::size_t l = 0; l < box_.dim(); ++l) {
    if (box_.lower[l] > box_.upper[l]) fail(ErrorCode::kValidation, "weight box has lower > upper");
  }
  if (values_.size() != box_.count()) fail(ErrorCode::kValidation, "weight values do not fill the box");
  for (double v : values_) {
    if (!std::isfinite(v)) fail(ErrorCode::kNumeric, "weight field has a non-finite entry");
  }
  stride_ = strides_of(box_);
}

WeightField WeightField::from_entries(std::size_t dim, const std::vector<std::pair<Point, double>>& entries) {
  if (dim == 0) fail(ErrorCode::kValidation, "weight field needs d >= 1");
  if (entries.empty()) fail(ErrorCode::kValidation, "weight field needs at least one entry");
  Rect box{entries.front().first, entries.front().first};
  std::map<Point, double> seen;
  for (const auto& [i, b] : entries) {
    if (i.size() != dim) fail(ErrorCode::kDimensionMismatch, "weight entry has wrong dimension");
    if (!seen.emplace(i, b).second) fail(ErrorCode::kValidation, "weight field has a repeated index");
    for (std::size_t l = 0; l < dim; ++l) {
      box.lower[l] = std::min(box.lower[l], i[l]);
      box.upper[l] = std::max(box.upper[l], i[l]);
    }
  }
  std::vector<double> values(box_points(box, kWindowLimit), 0.0);
  const auto stride = strides_of(box);
  for (const auto& [i, b] : seen) {
    std::size_t o = 0;
    for (std::size_t l = 0; l < dim; ++l) o += static_cast<std::size_t>(i[l] - box.lower[l]) * stride[l];
    values[o] = b;
  }
  return WeightField(std::move(box), std::move(values));
}

WeightField WeightField::from_values(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::kValidation, "weight field needs at least one entry");
  Rect box{{0}, {static_cast<Index>(values.size()) - 1}};
  return WeightField(std::move(box), std::move(values));
}

std::size_t WeightField::offset_of(std::span<const Index> i) const {
  std::size_t o = 0;
  for (std::size_t l = 0; l < dim(); ++l) o += static_cast<std::size_t>(i[l] - box_.lower[l]) * stride_[l];
  return o;
}

double WeightField::at(std::span<const Index> i) const {
  if (i.size() != dim()) fail(ErrorCode::kDimensionMismatch, "weight index has wrong dimension");
  if (values_.empty() || !box_.contains(i)) return 0.0;
  return values_[offset_of(i)];
}

std::vector<double> WeightField::nonzero_values() const {
  std::vector<double> out;
  out.reserve(nonzero_count());
  for (double v : values_) {
    if (v != 0.0) out.push_back(v);
  }
  return out;
}

std::size_t WeightField::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

Point WeightField::point_of(std::size_t offset) const {
  Point p(dim());
  unflatten(box_, stride_, offset, p);
  return p;
}

double WeightField::relative_tail(double B, double alpha, const SlowVary& L) const {
  if (tail_energy_bound_ == 0.0) return 0.0;
  return tail_energy_bound_ * std::pow(B, -alpha) * L.power_bound(0.0);
}

WeightField build_weights(const CoefficientModel& model, const RegionUnion& region, double alpha,
                          const SlowVary& L, const WeightOptions& options) {
  (void)L;
  validate(region);
  if (model.dim() != region.dim()) {
    fail(ErrorCode::kDimensionMismatch, "model has dimension " + std::to_string(model.dim()) +
                                            ", region has dimension " + std::to_string(region.dim()));
  }
  if (!(options.eps_tail > 0.0)) fail(ErrorCode::kDomain, "eps_tail must be positive");
  model.check_existence(alpha);

  const std::size_t d = model.dim();
  const Rect bbox = region.bounding_box();
  const bool finite = std::holds_alternative<CoefficientModel::Finite>(model.kind());
  Rect window{Point(d), Point(d)};
  double coefficient_tail = 0.0;
  if (finite) {
    const Rect support = model.support_box();
    for (std::size_t l = 0; l < d; ++l) {
      window.lower[l] = bbox.lower[l] - support.upper[l];
      window.upper[l] = bbox.upper[l] - support.lower[l];
    }
  } else {
    const auto margin = coefficient_margin(model, bbox, alpha, options);
    for (std::size_t l = 0; l < d; ++l) {
      window.lower[l] = bbox.lower[l] - margin[l];
      window.upper[l] = one_sided(model) ? bbox.upper[l] : bbox.upper[l] + margin[l];
    }
    coefficient_tail = model.tail_bound(alpha, nullptr, margin);
  }

  const std::size_t workers = worker_count(options.threads);
  std::vector<double> values(box_points(window, kWindowLimit), 0.0);
  using Strategy = WeightOptions::Strategy;
  if (options.strategy == Strategy::kDirect) {
    build_direct(model, region, window, values, workers);
  } else if (model.separable()) {
    build_separable(model, region, window, values);
  } else if (finite) {
    build_finite(model, region, window, values, workers);
  } else {
    build_summed_area(model, region, window, values, workers);
  }

  // |sum_{j in region} x_j|^alpha <= |region|^(alpha-1) sum |x_j|^alpha for alpha >= 1.
  const double region_size = static_cast<double>(cardinality(region));
  double tail = coefficient_tail * std::pow(region_size, std::max(1.0, alpha));
  if (options.drop_small && !finite) {
    double total = 0.0;
    for (double v : values) total += std::pow(std::fabs(v), alpha);
    tail += drop_small_entries(values, alpha, 0.5 * options.eps_tail * total);
  }
  return WeightField(std::move(window), std::move(values), tail);
}

double increment(const WeightField& field, std::span<const Index> i) {
  const std::size_t d = field.dim();
  if (i.size() != d) fail(ErrorCode::kDimensionMismatch, "increment index has wrong dimension");
  Point corner(i.begin(), i.end());
  double sum = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    int sign = 1;
    for (std::size_t l = 0; l < d; ++l) {
      const bool step = mask & (std::size_t{1} << l);
      corner[l] = i[l] - (step ? 1 : 0);
      if (step) sign = -sign;
    }
    sum += sign * field.at(corner);
  }
  return sum;
}

WeightDiagnostics diagnostics(const WeightField& field, double B) {
  if (!(B > 0.0)) fail(ErrorCode::kDomain, "B_n must be positive");
  WeightDiagnostics out;
  out.truncated = field.truncated();
  if (field.empty()) return out;
  for (double v : field.values()) out.sup_b = std::max(out.sup_b, std::fabs(v));
  out.rho_n = out.sup_b / B;

  // Increments are nonzero only on the box grown by one step on each upper side.
  const std::size_t d = field.dim();
  Rect grown = field.box();
  for (std::size_t l = 0; l < d; ++l) ++grown.upper[l];
  const auto stride = strides_of(grown);
  const std::size_t count = box_points(grown, 2.0 * kWindowLimit);
  Point i(d);
  for (std::size_t k = 0; k < count; ++k) {
    unflatten(grown, stride, k, i);
    out.delta_n = std::max(out.delta_n, std::fabs(increment(field, i)));
  }
  return out;
}

DeltaBoundCheck delta_bound_check(const CoefficientModel& model, const RegionUnion& region, double p,
                                  double q, double eps_tail, Index max_margin) {
  validate(region);
  if (model.dim() != region.dim()) fail(ErrorCode::kDimensionMismatch, "model and region dimensions differ");
  if (!(p >= 1.0) || !(q >= 1.0) || std::fabs(1.0 / p + 1.0 / q - 1.0) > 1e-9) {
    fail(ErrorCode::kValidation, "p and q must be conjugate exponents, 1/p + 1/q = 1");
  }
  if (!model.p_summable(p)) {
    fail(ErrorCode::kInapplicable, "coefficients are not p-summable: ||a||_p is infinite");
  }

  const std::size_t d = model.dim();
  Rect offsets{Point(d), Point(d)};
  if (std::holds_alternative<CoefficientModel::Finite>(model.kind())) {
    offsets = model.support_box();
  } else {
    const auto margin = model.window(p, nullptr, eps_tail, max_margin);
    for (std::size_t l = 0; l < d; ++l) {
      offsets.lower[l] = model.separable() ? 0 : -margin[l];
      offsets.upper[l] = margin[l];
    }
  }
  const std::size_t count = box_points(offsets, kWindowLimit);
  const auto ostride = strides_of(offsets);
  std::vector<double> a(count);
  double norm = 0.0;
  {
    Point k(d);
    for (std::size_t o = 0; o < count; ++o) {
      unflatten(offsets, ostride, o, k);
      a[o] = model.coeff(k);
      norm += std::pow(std::fabs(a[o]), p);
    }
  }

  // Delta b_i = sum over rectangles and corners c (c_l in {lower_l, upper_l + 1})
  // of sign(c) a_{c - i}, sign negative for each upper choice.
  struct Corner {
    Point c;
    int sign;
  };
  std::vector<Corner> corners;
  for (const Rect& rect : region.rects()) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      Corner corner{Point(d), 1};
      for (std::size_t l = 0; l < d; ++l) {
        if (mask & (std::size_t{1} << l)) {
          corner.c[l] = rect.upper[l] + 1;
          corner.sign = -corner.sign;
        } else {
          corner.c[l] = rect.lower[l];
        }
      }
      corners.push_back(std::move(corner));
    }
  }
  const Rect bbox = region.bounding_box();
  Rect candidates{Point(d), Point(d)};
  for (std::size_t l = 0; l < d; ++l) {
    candidates.lower[l] = bbox.lower[l] - offsets.upper[l];
    candidates.upper[l] = bbox.upper[l] + 1 - offsets.lower[l];
  }
  const auto cstride = strides_of(candidates);
  const std::size_t ccount = box_points(candidates, kWindowLimit);

  DeltaBoundCheck out;
  Point i(d);
  for (std::size_t k = 0; k < ccount; ++k) {
    unflatten(candidates, cstride, k, i);
    double sum = 0.0;
    for (const Corner& corner : corners) {
      std::size_t o = 0;
      bool inside = true;
      for (std::size_t l = 0; l < d; ++l) {
        const Index off = corner.c[l] - i[l];
        if (off < offsets.lower[l] || off > offsets.upper[l]) {
          inside = false;
          break;
        }
        o += static_cast<std::size_t>(off - offsets.lower[l]) * ostride[l];
      }
      if (inside) sum += corner.sign * a[o];
    }
    out.lhs = std::max(out.lhs, std::fabs(sum));
  }
  out.norm_p = std::pow(norm, 1.0 / p);
  const double J = static_cast<double>(region.rect_count());
  const double j_factor = std::isinf(q) ? 1.0 : std::pow(J, 1.0 / q);
  out.rhs = std::ldexp(1.0, static_cast<int>(d)) * j_factor * out.norm_p;
  out.holds = out.lhs <= out.rhs;
  return out;
}

void write_csv(const WeightField& field, std::ostream& out) {
  const std::size_t d = field.dim();
  for (std::size_t l = 0; l < d; ++l) out << "i_" << (l + 1) << ',';
  out << "b\n";
  const auto old_precision = out.precision(17);
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double b = field.values()[k];
    if (b == 0.0) continue;
    const Point p = field.point_of(k);
    for (Index c : p) out << c << ',';
    out << b << '\n';
  }
  out.precision(old_precision);
}

}  // namespace stablefield
