#include "stablefield/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
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

double sum_of_inverse(std::span<const double> beta) {
  double q = 0.0;
  for (double b : beta) q += 1.0 / b;
  return q;
}

// |a|^s L(1/|a|) with the zero convention.
double power_term(double a, double s, const SlowVary* L) {
  if (a == 0.0) return 0.0;
  const double m = std::fabs(a);
  const double base = std::pow(m, s);
  return L ? base * (*L)(1.0 / m) : base;
}

// Sum_{k > M} k^-tau <= M^(1-tau) / (tau - 1), M >= 1, tau > 1.
double power_tail(double tau, double M) { return std::pow(M, 1.0 - tau) / (tau - 1.0); }

}  // namespace

CoefficientModel CoefficientModel::doubly_geometric(double theta, double rho) {
  return geometric({theta, rho});
}

CoefficientModel CoefficientModel::geometric(std::vector<double> ratio) {
  if (ratio.empty()) fail(ErrorCode::kValidation, "geometric model needs at least one axis");
  for (double r : ratio) {
    if (!(std::fabs(r) < 1.0)) fail(ErrorCode::kValidation, "geometric ratios must satisfy |theta| < 1");
  }
  return CoefficientModel(Geometric{std::move(ratio)});
}

CoefficientModel CoefficientModel::farima(std::vector<double> memory) {
  if (memory.empty()) fail(ErrorCode::kValidation, "farima model needs at least one axis");
  for (double b : memory) {
    if (!(b > 0.0 && b < 1.0)) fail(ErrorCode::kValidation, "farima memory parameters must lie in (0, 1)");
  }
  return CoefficientModel(Farima{std::move(memory)});
}

CoefficientModel CoefficientModel::isotropic(double beta, std::size_t dim, double a0) {
  if (!(beta > 0.0) || dim == 0 || !std::isfinite(a0)) {
    fail(ErrorCode::kValidation, "isotropic model needs beta > 0, d >= 1 and finite a0");
  }
  return CoefficientModel(Isotropic{beta, dim, a0});
}

CoefficientModel CoefficientModel::anisotropic(std::vector<double> beta, double gamma, double a0) {
  if (beta.empty() || !(gamma > 0.0) || !std::isfinite(a0)) {
    fail(ErrorCode::kValidation, "anisotropic model needs d >= 1, gamma > 0 and finite a0");
  }
  for (double b : beta) {
    if (!(b > 0.0)) fail(ErrorCode::kValidation, "anisotropic exponents must be positive");
  }
  return CoefficientModel(Anisotropic{std::move(beta), gamma, a0});
}

CoefficientModel CoefficientModel::finite(std::size_t dim, std::vector<std::pair<Point, double>> entries) {
  if (dim == 0) fail(ErrorCode::kValidation, "finite model needs d >= 1");
  if (entries.empty()) fail(ErrorCode::kValidation, "finite model needs at least one entry");
  std::map<Point, double> merged;
  for (auto& [point, value] : entries) {
    if (point.size() != dim) fail(ErrorCode::kDimensionMismatch, "finite model entry has wrong dimension");
    if (!std::isfinite(value)) fail(ErrorCode::kValidation, "finite model coefficients must be finite");
    if (merged.contains(point)) fail(ErrorCode::kValidation, "finite model has a repeated index");
    merged.emplace(point, value);
  }
  std::vector<std::pair<Point, double>> sorted(merged.begin(), merged.end());
  return CoefficientModel(Finite{dim, std::move(sorted)});
}

std::size_t CoefficientModel::dim() const {
  return std::visit(Overloaded{
                        [](const Geometric& g) { return g.ratio.size(); },
                        [](const Farima& f) { return f.memory.size(); },
                        [](const Isotropic& m) { return m.dim; },
                        [](const Anisotropic& m) { return m.beta.size(); },
                        [](const Finite& f) { return f.dim; },
                    },
                    kind_);
}

std::string CoefficientModel::describe() const {
  std::ostringstream out;
  auto list = [&](const std::vector<double>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << v[k];
  };
  std::visit(Overloaded{
                 [&](const Geometric& g) {
                   out << "geometric(";
                   list(g.ratio);
                   out << ")";
                 },
                 [&](const Farima& f) {
                   out << "farima(";
                   list(f.memory);
                   out << ")";
                 },
                 [&](const Isotropic& m) {
                   out << "isotropic(beta=" << m.beta << ",d=" << m.dim << ",a0=" << m.a0 << ")";
                 },
                 [&](const Anisotropic& m) {
                   out << "anisotropic(beta=";
                   list(m.beta);
                   out << ",gamma=" << m.gamma << ",a0=" << m.a0 << ")";
                 },
                 [&](const Finite& f) { out << "finite(" << f.entries.size() << " entries)"; },
             },
             kind_);
  return out.str();
}

void CoefficientModel::check_dim(std::span<const Index> i) const {
  if (i.size() != dim()) {
    fail(ErrorCode::kDimensionMismatch, "coefficient index has dimension " + std::to_string(i.size()) +
                                            ", model has " + std::to_string(dim()));
  }
}

double CoefficientModel::axis_factor(std::size_t axis, Index j) const {
  if (j < 0) return 0.0;
  return std::visit(Overloaded{
                        [&](const Geometric& g) {
                          return std::pow(g.ratio.at(axis), static_cast<double>(j));
                        },
                        [&](const Farima& f) {
                          const double beta = f.memory.at(axis);
                          double value = 1.0;
                          for (Index k = 0; k < j; ++k) {
                            value *= (static_cast<double>(k) + beta) / static_cast<double>(k + 1);
                          }
                          return value;
                        },
                        [](const auto&) -> double {
                          fail(ErrorCode::kValidation, "axis factors exist only for separable models");
                        },
                    },
                    kind_);
}

std::vector<double> CoefficientModel::axis_table(std::size_t axis, Index max_j) const {
  if (!separable()) fail(ErrorCode::kValidation, "axis tables exist only for separable models");
  std::vector<double> table(static_cast<std::size_t>(std::max<Index>(max_j, -1) + 1));
  if (table.empty()) return table;
  table[0] = 1.0;
  if (const auto* g = std::get_if<Geometric>(&kind_)) {
    const double theta = g->ratio.at(axis);
    for (std::size_t k = 1; k < table.size(); ++k) table[k] = std::pow(theta, static_cast<double>(k));
  } else {
    const double beta = std::get<Farima>(kind_).memory.at(axis);
    for (std::size_t k = 1; k < table.size(); ++k) {
      table[k] = table[k - 1] * (static_cast<double>(k - 1) + beta) / static_cast<double>(k);
    }
  }
  return table;
}

double CoefficientModel::coeff(std::span<const Index> i) const {
  check_dim(i);
  return std::visit(
      Overloaded{
          [&](const Geometric&) {
            double value = 1.0;
            for (std::size_t l = 0; l < i.size(); ++l) value *= axis_factor(l, i[l]);
            return value;
          },
          [&](const Farima&) {
            double value = 1.0;
            for (std::size_t l = 0; l < i.size(); ++l) value *= axis_factor(l, i[l]);
            return value;
          },
          [&](const Isotropic& m) {
            double norm2 = 0.0;
            for (Index c : i) norm2 += static_cast<double>(c) * static_cast<double>(c);
            if (norm2 == 0.0) return m.a0;
            return std::pow(norm2, -0.5 * m.beta);
          },
          [&](const Anisotropic& m) {
            double rho = 0.0;
            for (std::size_t l = 0; l < i.size(); ++l) {
              rho += std::pow(std::fabs(static_cast<double>(i[l])), m.beta[l]);
            }
            if (rho == 0.0) return m.a0;
            return std::pow(rho, -m.gamma);
          },
          [&](const Finite& f) {
            const auto it = std::lower_bound(
                f.entries.begin(), f.entries.end(), i,
                [](const std::pair<Point, double>& e, std::span<const Index> key) {
                  return std::lexicographical_compare(e.first.begin(), e.first.end(), key.begin(),
                                                      key.end());
                });
            if (it != f.entries.end() && std::equal(it->first.begin(), it->first.end(), i.begin(), i.end())) {
              return it->second;
            }
            return 0.0;
          },
      },
      kind_);
}

bool CoefficientModel::separable() const {
  return std::holds_alternative<Geometric>(kind_) || std::holds_alternative<Farima>(kind_);
}

bool CoefficientModel::ell1_finite() const {
  return std::visit(Overloaded{
                        [](const Geometric&) { return true; },
                        [](const Farima&) { return false; },
                        [](const Isotropic& m) { return m.beta > static_cast<double>(m.dim); },
                        [](const Anisotropic& m) { return m.gamma > sum_of_inverse(m.beta); },
                        [](const Finite&) { return true; },
                    },
                    kind_);
}

bool CoefficientModel::p_summable(double p) const {
  if (!(p > 0.0)) return false;
  return std::visit(Overloaded{
                        [](const Geometric&) { return true; },
                        [&](const Farima& f) {
                          return std::all_of(f.memory.begin(), f.memory.end(),
                                             [&](double b) { return (1.0 - b) * p > 1.0; });
                        },
                        [&](const Isotropic& m) { return m.beta * p > static_cast<double>(m.dim); },
                        [&](const Anisotropic& m) { return m.gamma * p > sum_of_inverse(m.beta); },
                        [](const Finite&) { return true; },
                    },
                    kind_);
}

void CoefficientModel::check_existence(double alpha) const {
  if (!(alpha > 0.0 && alpha <= 2.0)) fail(ErrorCode::kDomain, "alpha must lie in (0, 2]");
  std::visit(Overloaded{
                 [](const Geometric&) {},
                 [&](const Farima& f) {
                   for (double b : f.memory) {
                     if (!((1.0 - b) * alpha > 1.0)) {
                       std::ostringstream msg;
                       msg << "farima field does not exist: (1 - beta) * alpha = " << (1.0 - b) * alpha
                           << " is not > 1";
                       fail(ErrorCode::kModelInvalid, msg.str());
                     }
                   }
                 },
                 [&](const Isotropic& m) {
                   if (!(alpha * m.beta > static_cast<double>(m.dim))) {
                     std::ostringstream msg;
                     msg << "isotropic field does not exist: alpha * beta = " << alpha * m.beta
                         << " is not > d = " << m.dim;
                     fail(ErrorCode::kModelInvalid, msg.str());
                   }
                 },
                 [&](const Anisotropic& m) {
                   const double q = sum_of_inverse(m.beta);
                   if (!(alpha * m.gamma > q)) {
                     std::ostringstream msg;
                     msg << "anisotropic field does not exist: alpha * gamma = " << alpha * m.gamma
                         << " is not > Q = " << q;
                     fail(ErrorCode::kModelInvalid, msg.str());
                   }
                 },
                 [](const Finite&) {},
             },
             kind_);
}

Rect CoefficientModel::support_box() const {
  const auto* f = std::get_if<Finite>(&kind_);
  if (!f) fail(ErrorCode::kValidation, "only finite models have a bounded support");
  Rect box{f->entries.front().first, f->entries.front().first};
  for (const auto& [point, value] : f->entries) {
    for (std::size_t l = 0; l < f->dim; ++l) {
      box.lower[l] = std::min(box.lower[l], point[l]);
      box.upper[l] = std::max(box.upper[l], point[l]);
    }
  }
  return box;
}

double CoefficientModel::tail_bound(double s, const SlowVary* L, std::span<const Index> margin) const {
  if (margin.size() != dim()) fail(ErrorCode::kDimensionMismatch, "margin has wrong dimension");
  if (!(s > 0.0)) fail(ErrorCode::kDomain, "tail exponent must be positive");
  for (Index m : margin) {
    if (m < 1) fail(ErrorCode::kDomain, "tail bounds need margins >= 1");
  }

  if (const auto* f = std::get_if<Finite>(&kind_)) {
    double outside = 0.0;
    for (const auto& [point, value] : f->entries) {
      bool inside = true;
      for (std::size_t l = 0; l < f->dim; ++l) inside = inside && std::llabs(point[l]) <= margin[l];
      if (!inside) outside += power_term(value, s, L);
    }
    return outside;
  }

  // Largest exponent slack delta with L(x) <= C x^delta still leaving a
  // summable tail; delta = 0 whenever L is bounded.
  double slack = 0.0;
  std::visit(Overloaded{
                 [&](const Geometric&) { slack = s; },
                 [&](const Farima& f) {
                   slack = kInf;
                   for (double b : f.memory) slack = std::min(slack, s - 1.0 / (1.0 - b));
                 },
                 [&](const Isotropic& m) { slack = s - static_cast<double>(m.dim) / m.beta; },
                 [&](const Anisotropic& m) { slack = s - sum_of_inverse(m.beta) / m.gamma; },
                 [](const Finite&) {},
             },
             kind_);
  if (!(slack > 0.0)) return kInf;
  double delta = 0.0;
  double scale = 1.0;
  if (L) {
    scale = L->power_bound(0.0);
    if (!std::isfinite(scale)) {
      delta = 0.5 * slack;
      scale = L->power_bound(delta);
    }
  }
  const double sigma = s - delta;

  const double raw = std::visit(
      Overloaded{
          [&](const Geometric& g) {
            // prod S_l - prod S_l(M_l), telescoped to avoid cancellation.
            const std::size_t d = g.ratio.size();
            std::vector<double> full(d), part(d), rest(d);
            for (std::size_t l = 0; l < d; ++l) {
              const double r = std::pow(std::fabs(g.ratio[l]), sigma);
              const double tail_factor = std::pow(r, static_cast<double>(margin[l] + 1));
              full[l] = 1.0 / (1.0 - r);
              part[l] = (1.0 - tail_factor) / (1.0 - r);
              rest[l] = tail_factor / (1.0 - r);
            }
            double total = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
              double term = rest[l];
              for (std::size_t m = 0; m < l; ++m) term *= part[m];
              for (std::size_t m = l + 1; m < d; ++m) term *= full[m];
              total += term;
            }
            return total;
          },
          [&](const Farima& f) {
            // g(k) <= min(1, k^(beta-1) / Gamma(beta)) by Gautschi's inequality.
            const std::size_t d = f.memory.size();
            std::vector<double> part(d), rest(d);
            for (std::size_t l = 0; l < d; ++l) {
              const double beta = f.memory[l];
              const auto table = axis_table(l, margin[l]);
              double sum = 0.0;
              for (double g : table) sum += std::pow(g, sigma);
              part[l] = sum;
              rest[l] = std::pow(std::tgamma(beta), -sigma) *
                        power_tail((1.0 - beta) * sigma, static_cast<double>(margin[l]));
            }
            double total = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
              double term = rest[l];
              for (std::size_t m = 0; m < l; ++m) term *= part[m];
              for (std::size_t m = l + 1; m < d; ++m) term *= part[m] + rest[m];
              total += term;
            }
            return total;
          },
          [&](const Isotropic& m) {
            // Abel summation with #{|k| <= r} <= (3r)^d for r >= 1.
            const double d = static_cast<double>(m.dim);
            const double tau = m.beta * sigma;
            const double R = static_cast<double>(*std::min_element(margin.begin(), margin.end()));
            return std::pow(3.0, d) * tau * std::pow(R, d - tau) / (tau - d);
          },
          [&](const Anisotropic& m) {
            const double q = sum_of_inverse(m.beta);
            const double tau = m.gamma * sigma;
            double R = kInf;
            for (std::size_t l = 0; l < m.beta.size(); ++l) {
              R = std::min(R, std::pow(static_cast<double>(margin[l]), m.beta[l]));
            }
            const double d = static_cast<double>(m.beta.size());
            return std::pow(3.0, d) * tau * std::pow(R, q - tau) / (tau - q);
          },
          [](const Finite&) { return 0.0; },
      },
      kind_);
  return scale * raw;
}

std::vector<Index> CoefficientModel::window(double s, const SlowVary* L, double eps, Index cap) const {
  if (!(eps > 0.0)) fail(ErrorCode::kDomain, "tail tolerance must be positive");
  if (cap < 1) fail(ErrorCode::kDomain, "window cap must be >= 1");
  const std::size_t d = dim();

  if (const auto* f = std::get_if<Finite>(&kind_)) {
    (void)f;
    const Rect box = support_box();
    std::vector<Index> margin(d);
    for (std::size_t l = 0; l < d; ++l) {
      margin[l] = std::max<Index>({1, std::llabs(box.lower[l]), std::llabs(box.upper[l])});
    }
    return margin;
  }

  const auto* aniso = std::get_if<Anisotropic>(&kind_);
  // Margins as a function of a scalar size parameter t >= 1.
  auto margins_for = [&](Index t) {
    std::vector<Index> margin(d, t);
    if (aniso) {
      // Match the anisotropy: |k_l|^beta_l ~ t^beta_max on every axis.
      const double beta_max = *std::max_element(aniso->beta.begin(), aniso->beta.end());
      for (std::size_t l = 0; l < d; ++l) {
        const double m = std::ceil(std::pow(static_cast<double>(t), beta_max / aniso->beta[l]));
        margin[l] = std::clamp<Index>(static_cast<Index>(std::min(m, 1e15)), 1, cap);
      }
    }
    return margin;
  };

  Index hi = 1;
  while (tail_bound(s, L, margins_for(hi)) > eps) {
    if (hi >= cap) return margins_for(cap);
    hi = std::min(cap, hi * 2);
  }
  Index lo = hi / 2;
  if (lo < 1) return margins_for(hi);
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    if (tail_bound(s, L, margins_for(mid)) > eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return margins_for(hi);
}

double windowed_power_sum(const CoefficientModel& model, double s, const SlowVary* L,
                          std::span<const Index> margin) {
  const std::size_t d = model.dim();
  if (margin.size() != d) fail(ErrorCode::kDimensionMismatch, "margin has wrong dimension");
  if (const auto* f = std::get_if<CoefficientModel::Finite>(&model.kind())) {
    double sum = 0.0;
    for (const auto& [point, value] : f->entries) {
      bool inside = true;
      for (std::size_t l = 0; l < d; ++l) inside = inside && std::llabs(point[l]) <= margin[l];
      if (inside) sum += power_term(value, s, L);
    }
    return sum;
  }
  const bool one_sided = model.separable();
  Point lower(d), upper(d);
  double points = 1.0;
  for (std::size_t l = 0; l < d; ++l) {
    lower[l] = one_sided ? 0 : -margin[l];
    upper[l] = margin[l];
    points *= static_cast<double>(upper[l] - lower[l] + 1);
  }
  if (points > 5e7) fail(ErrorCode::kNumeric, "window too large for a direct coefficient sum");

  // Separable kinds with L == 1 factor exactly into per-axis sums.
  if (one_sided && !L) {
    double product = 1.0;
    for (std::size_t l = 0; l < d; ++l) {
      double axis_sum = 0.0;
      for (double g : model.axis_table(l, margin[l])) axis_sum += power_term(g, s, nullptr);
      product *= axis_sum;
    }
    return product;
  }

  double sum = 0.0;
  Point k = lower;
  for (;;) {
    sum += power_term(model.coeff(k), s, L);
    std::size_t l = 0;
    for (; l < d; ++l) {
      if (++k[l] <= upper[l]) break;
      k[l] = lower[l];
    }
    if (l == d) break;
  }
  return sum;
}

SummabilityReport summability_report(const CoefficientModel& model, double alpha, const SlowVary& L,
                                     double eps_tail, Index cap) {
  model.check_existence(alpha);
  SummabilityReport report;
  report.ell1_finite = model.ell1_finite();
  report.margin = model.window(alpha, &L, eps_tail, cap);
  report.alpha_sum = windowed_power_sum(model, alpha, &L, report.margin);
  report.tail_bound = model.tail_bound(alpha, &L, report.margin);
  return report;
}

}  // namespace stablefield
