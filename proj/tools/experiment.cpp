#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "stablefield/coeffs.hpp"
#include "stablefield/error.hpp"
#include "stablefield/innovations.hpp"
#include "stablefield/lattice.hpp"
#include "stablefield/montecarlo.hpp"
#include "stablefield/normalizer.hpp"
#include "stablefield/slowvary.hpp"
#include "stablefield/stable.hpp"
#include "stablefield/weights.hpp"

#ifndef STABLEFIELD_VERSION_STRING
#define STABLEFIELD_VERSION_STRING "0.0.0-unknown"
#endif

namespace stablefield::cli {
namespace {

[[noreturn]] void config_fail(const std::string& msg) { fail(ErrorCode::kConfig, msg); }

// Read access to one table of the config, with key checking.
class Section {
 public:
  Section(const Json* table, std::string path) : table_(table), path_(std::move(path)) {
    if (table_ != nullptr && !table_->is_object()) config_fail(path_ + " must be a table");
  }

  bool present() const { return table_ != nullptr; }
  bool has(const std::string& key) const { return table_ != nullptr && table_->contains(key); }

  void allow(std::initializer_list<const char*> keys) const {
    if (table_ == nullptr) return;
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : table_->items()) {
      if (!allowed.count(key)) config_fail("unknown key " + name(key));
    }
  }

  const Json& raw(const std::string& key) const {
    if (!has(key)) config_fail("missing key " + name(key));
    return table_->at(key);
  }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) config_fail(name(key) + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer()) config_fail(name(key) + " must be an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::string text(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) config_fail(name(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) config_fail(name(key) + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array()) config_fail(name(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) config_fail(name(key) + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<Index> integers(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array()) config_fail(name(key) + " must be an array of integers");
    std::vector<Index> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) config_fail(name(key) + " must be an array of integers");
      out.push_back(x.get<Index>());
    }
    return out;
  }

  std::vector<std::vector<double>> rows(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array()) config_fail(name(key) + " must be an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) {
      if (!row.is_array()) config_fail(name(key) + " must be an array of arrays");
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number()) config_fail(name(key) + " entries must be numbers");
        r.push_back(x.get<double>());
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json* table_;
  std::string path_;
};

Section sub(const Json& root, const std::string& key) {
  if (!root.contains(key)) return Section(nullptr, key);
  return Section(&root.at(key), key);
}

Index to_index(double v, const std::string& what) {
  if (v != std::floor(v) || std::fabs(v) > 9e15) config_fail(what + " must be an integer");
  return static_cast<Index>(v);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path), path_(path) {
    if (!out_) fail(ErrorCode::kIo, "cannot write " + path.string());
    row_strings(header);
  }

  template <class... T>
  void row(const T&... cells) {
    std::vector<std::string> s{cell(cells)...};
    row_strings(s);
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
    if (!out_) fail(ErrorCode::kIo, "write failed for " + path_.string());
  }

  std::ofstream out_;
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------

struct RegionSpec {
  std::string kind;
  std::vector<Index> n_values;  // one entry per run; unused for explicit regions
  std::size_t d = 2;
  std::vector<double> c;
  std::vector<double> beta;
  std::vector<Rect> rects;
  std::size_t J = 1;
  Index max_side = 1;
  std::uint64_t seed = 0;

  RegionUnion at(Index n) const {
    if (kind == "cube") return regions::cube(d, n);
    if (kind == "symbox") return regions::symmetric_box(c, n);
    if (kind == "anisobox") return regions::anisotropic_box(beta, n);
    if (kind == "scattered") return regions::scattered(d, J, n, max_side, seed);
    RegionUnion region(rects);
    validate(region);
    return region;
  }
};

struct Experiment {
  std::string mode;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::size_t replicates = 10000;
  std::size_t threads = 0;
  double growth_q = 0.0;

  std::optional<CoefficientModel> coeffs;
  WeightOptions weight_options;
  RegionSpec region;
  std::optional<WeightField> direct;

  std::optional<InnovationModel> innovations;
  std::optional<double> c_alpha_override;
  std::vector<double> t_grid;
  std::optional<SlowVary> L;  // empty: canonical for the innovations
  SolverOptions solver;

  std::optional<TestFunction> m;
  std::vector<double> u;
  std::vector<double> u_over_B;
  std::vector<std::pair<double, double>> intervals;

  std::optional<double> rate_constant;
  std::optional<double> rate_exponent;
  bool fit_all = false;

  double tab_from = -10.0;
  double tab_to = 10.0;
  std::size_t tab_points = 401;

  std::filesystem::path out_dir;
  bool write_samples = false;
  bool write_weights = false;
};

CoefficientModel parse_coeffs(const Section& s, Experiment& e) {
  s.allow({"kind", "theta", "rho", "ratio", "beta", "d", "a0", "gamma", "entries", "eps_tail", "max_margin",
           "margin_factor", "strategy", "drop_small"});
  e.weight_options.eps_tail = s.number("eps_tail", e.weight_options.eps_tail);
  e.weight_options.max_margin = s.integer("max_margin", e.weight_options.max_margin);
  e.weight_options.margin_factor = s.number("margin_factor", 0.0);
  e.weight_options.drop_small = s.flag("drop_small", true);
  const std::string strategy = s.text("strategy", "auto");
  if (strategy == "auto") {
    e.weight_options.strategy = WeightOptions::Strategy::kAuto;
  } else if (strategy == "direct") {
    e.weight_options.strategy = WeightOptions::Strategy::kDirect;
  } else if (strategy == "fast") {
    e.weight_options.strategy = WeightOptions::Strategy::kFast;
  } else {
    config_fail("coeffs.strategy must be auto, direct or fast");
  }

  const std::string kind = s.text("kind");
  if (kind == "geometric" || kind == "doubly_geometric") {
    if (s.has("ratio")) return CoefficientModel::geometric(s.numbers("ratio"));
    return CoefficientModel::doubly_geometric(s.number("theta"), s.number("rho"));
  }
  if (kind == "farima") return CoefficientModel::farima(s.numbers("beta"));
  if (kind == "isotropic") {
    return CoefficientModel::isotropic(s.number("beta"), static_cast<std::size_t>(s.integer("d")), s.number("a0", 1.0));
  }
  if (kind == "anisotropic") return CoefficientModel::anisotropic(s.numbers("beta"), s.number("gamma"), s.number("a0", 1.0));
  if (kind == "finite") {
    const auto rows = s.rows("entries");
    if (rows.empty()) config_fail("coeffs.entries must not be empty");
    const std::size_t dim = rows.front().size() - 1;
    std::vector<std::pair<Point, double>> entries;
    for (const auto& r : rows) {
      if (r.size() != dim + 1 || dim == 0) config_fail("coeffs.entries rows must be [i_1, ..., i_d, a]");
      Point p;
      for (std::size_t l = 0; l < dim; ++l) p.push_back(to_index(r[l], "coeffs.entries index"));
      entries.emplace_back(std::move(p), r.back());
    }
    return CoefficientModel::finite(dim, std::move(entries));
  }
  config_fail("coeffs.kind must be geometric, farima, isotropic, anisotropic or finite");
}

RegionSpec parse_region(const Section& s) {
  s.allow({"kind", "n", "n_grid", "d", "c", "beta", "rects", "J", "max_side", "seed"});
  RegionSpec r;
  r.kind = s.text("kind");
  if (r.kind == "explicit") {
    for (const auto& row : s.rows("rects")) {
      if (row.empty() || row.size() % 2 != 0) config_fail("region.rects rows must be [lower..., upper...]");
      const std::size_t d = row.size() / 2;
      Rect rect;
      for (std::size_t l = 0; l < d; ++l) {
        rect.lower.push_back(to_index(row[l], "region.rects"));
        rect.upper.push_back(to_index(row[d + l], "region.rects"));
      }
      r.rects.push_back(std::move(rect));
    }
    if (r.rects.empty()) config_fail("region.rects must not be empty");
    r.n_values = {0};
    return r;
  }
  if (s.has("n") == s.has("n_grid")) config_fail("region needs exactly one of n and n_grid");
  r.n_values = s.has("n") ? std::vector<Index>{s.integer("n")} : s.integers("n_grid");
  if (r.n_values.empty()) config_fail("region.n_grid must not be empty");
  for (std::size_t k = 1; k < r.n_values.size(); ++k) {
    if (!(r.n_values[k] > r.n_values[k - 1])) config_fail("region.n_grid must be strictly increasing");
  }
  if (r.kind == "cube") {
    r.d = static_cast<std::size_t>(s.integer("d", 2));
  } else if (r.kind == "symbox") {
    r.c = s.has("c") ? s.numbers("c") : std::vector<double>(static_cast<std::size_t>(s.integer("d", 2)), 1.0);
  } else if (r.kind == "anisobox") {
    r.beta = s.numbers("beta");
  } else if (r.kind == "scattered") {
    r.d = static_cast<std::size_t>(s.integer("d", 2));
    r.J = static_cast<std::size_t>(s.integer("J"));
    r.max_side = s.integer("max_side", 4);
    r.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  } else {
    config_fail("region.kind must be cube, symbox, anisobox, explicit or scattered");
  }
  return r;
}

SlowVary parse_L(const Json& root) {
  const Json& v = root.at("L");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "one") return SlowVary::constant(1.0);
    config_fail("L must be \"canonical\", \"one\" or a table");
  }
  const Section s(&v, "L");
  s.allow({"kind", "value", "alpha", "exponent", "grid", "values"});
  const std::string kind = s.text("kind");
  if (kind == "constant") return SlowVary::constant(s.number("value", 1.0));
  if (kind == "pareto_canonical") return SlowVary::pareto_canonical(s.number("alpha"));
  if (kind == "log_power") return SlowVary::log_power(s.number("exponent"));
  if (kind == "tabulated") return SlowVary::tabulated(s.numbers("grid"), s.numbers("values"));
  config_fail("L.kind must be constant, pareto_canonical, log_power or tabulated");
}

InnovationModel parse_innovations(const Section& s, Experiment& e) {
  s.allow({"kind", "alpha", "c_alpha", "beta", "c_plus", "centered", "t_grid"});
  if (s.has("alpha") && s.number("alpha") != e.alpha) config_fail("innovations.alpha differs from alpha");
  const std::string kind = s.text("kind", "exact_stable");
  if (kind == "exact_stable") {
    return InnovationModel::exact_stable(StableLaw(e.alpha, s.number("c_alpha", 1.0), s.number("beta", 0.0)));
  }
  if (kind == "pareto_mix") {
    if (s.has("c_alpha")) e.c_alpha_override = s.number("c_alpha");
    if (s.has("t_grid")) e.t_grid = s.numbers("t_grid");
    return InnovationModel::pareto_mix(e.alpha, s.number("c_plus", 0.5), s.flag("centered", true));
  }
  config_fail("innovations.kind must be exact_stable or pareto_mix");
}

Experiment parse_experiment(const Json& root) {
  const Section top(&root, "");
  top.allow({"mode", "alpha", "seed", "replicates", "threads", "growth_q", "L", "coeffs", "region", "weights",
             "innovations", "solver", "llt", "asymptotics", "tabulate", "outputs"});
  Experiment e;
  e.mode = top.text("mode");
  static const std::set<std::string> modes{"weights", "normalize", "simulate", "llt", "asymptotics", "conditions",
                                           "tabulate"};
  if (!modes.count(e.mode)) {
    config_fail("mode must be weights, normalize, simulate, llt, asymptotics, conditions or tabulate");
  }
  e.alpha = top.number("alpha");
  const std::int64_t seed = top.integer("seed", 0);
  e.seed = static_cast<std::uint64_t>(seed);
  const std::int64_t replicates = top.integer("replicates", 10000);
  if (replicates < 1) config_fail("replicates must be >= 1");
  e.replicates = static_cast<std::size_t>(replicates);
  const std::int64_t threads = top.integer("threads", 0);
  if (threads < 0) config_fail("threads must be >= 0");
  e.threads = static_cast<std::size_t>(threads);
  e.weight_options.threads = e.threads;
  e.solver.threads = e.threads;
  e.growth_q = top.number("growth_q", 0.0);

  e.innovations = parse_innovations(sub(root, "innovations"), e);
  if (top.has("L") && !(root.at("L").is_string() && root.at("L").get<std::string>() == "canonical")) {
    e.L = parse_L(root);
  }

  if (e.mode != "tabulate") {
    const Section weights = sub(root, "weights");
    if (weights.present()) {
      if (root.contains("coeffs") || root.contains("region")) config_fail("[weights] replaces [coeffs] and [region]");
      weights.allow({"values", "entries"});
      if (weights.has("values")) {
        e.direct = WeightField::from_values(weights.numbers("values"));
      } else {
        const auto rows = weights.rows("entries");
        if (rows.empty() || rows.front().size() < 2) config_fail("weights.entries rows must be [i_1, ..., i_d, b]");
        const std::size_t dim = rows.front().size() - 1;
        std::vector<std::pair<Point, double>> entries;
        for (const auto& r : rows) {
          if (r.size() != dim + 1) config_fail("weights.entries rows must all have the same length");
          Point p;
          for (std::size_t l = 0; l < dim; ++l) p.push_back(to_index(r[l], "weights.entries index"));
          entries.emplace_back(std::move(p), r.back());
        }
        e.direct = WeightField::from_entries(dim, entries);
      }
      e.region.n_values = {0};
    } else {
      e.coeffs = parse_coeffs(sub(root, "coeffs"), e);
      e.region = parse_region(sub(root, "region"));
    }
  }

  const Section solver = sub(root, "solver");
  solver.allow({"tol", "max_growth", "verify_points", "on_non_monotone"});
  e.solver.tol = solver.number("tol", e.solver.tol);
  e.solver.max_growth = static_cast<int>(solver.integer("max_growth", e.solver.max_growth));
  e.solver.verify_points = static_cast<int>(solver.integer("verify_points", e.solver.verify_points));
  const std::string policy = solver.text("on_non_monotone", "grid_scan");
  if (policy == "grid_scan") {
    e.solver.on_non_monotone = SolverOptions::OnNonMonotone::kGridScan;
  } else if (policy == "throw") {
    e.solver.on_non_monotone = SolverOptions::OnNonMonotone::kThrow;
  } else {
    config_fail("solver.on_non_monotone must be grid_scan or throw");
  }

  const Section llt = sub(root, "llt");
  llt.allow({"m", "half_width", "ramp", "x", "y", "u", "u_over_B", "intervals"});
  if (e.mode == "llt") {
    const std::string m = llt.text("m", "tent");
    if (m == "tent") {
      e.m = TestFunction::tent();
    } else if (m == "box") {
      e.m = TestFunction::smoothed_box(llt.number("half_width", 1.0), llt.number("ramp", 0.5));
    } else if (m == "tabulated") {
      e.m = TestFunction::tabulated(llt.numbers("x"), llt.numbers("y"));
    } else {
      config_fail("llt.m must be tent, box or tabulated");
    }
    if (llt.has("u")) e.u = llt.numbers("u");
    if (llt.has("u_over_B")) e.u_over_B = llt.numbers("u_over_B");
    if (!llt.has("u") && !llt.has("u_over_B")) e.u = {0.0};
    if (llt.has("intervals")) {
      for (const auto& r : llt.rows("intervals")) {
        if (r.size() != 2) config_fail("llt.intervals rows must be [a, b]");
        e.intervals.emplace_back(r[0], r[1]);
      }
    } else {
      e.intervals = {{-1.0, 1.0}};
    }
  }

  const Section asym = sub(root, "asymptotics");
  asym.allow({"rate_constant", "rate_exponent", "fit"});
  if (asym.has("rate_constant")) e.rate_constant = asym.number("rate_constant");
  if (asym.has("rate_exponent")) e.rate_exponent = asym.number("rate_exponent");
  if (e.rate_constant.has_value() != e.rate_exponent.has_value()) {
    config_fail("asymptotics needs both rate_constant and rate_exponent");
  }
  const std::string fit = asym.text("fit", "upper_half");
  if (fit != "upper_half" && fit != "all") config_fail("asymptotics.fit must be upper_half or all");
  e.fit_all = fit == "all";

  const Section tab = sub(root, "tabulate");
  tab.allow({"from", "to", "points"});
  e.tab_from = tab.number("from", e.tab_from);
  e.tab_to = tab.number("to", e.tab_to);
  const std::int64_t points = tab.integer("points", 401);
  if (points < 2 || !(e.tab_to > e.tab_from)) config_fail("tabulate needs from < to and points >= 2");
  e.tab_points = static_cast<std::size_t>(points);

  const Section outputs = sub(root, "outputs");
  outputs.allow({"dir", "samples", "weights"});
  e.out_dir = outputs.text("dir", "stablefield_out");
  e.write_samples = outputs.flag("samples", false);
  e.write_weights = outputs.flag("weights", e.mode == "weights");
  return e;
}

// ---------------------------------------------------------------------------

struct Instance {
  Index n = 0;
  std::size_t J = 0;
  std::uint64_t cardinality = 0;
  WeightField field;
};

Instance make_instance(const Experiment& e, Index n, const SlowVary& L) {
  Instance out;
  out.n = n;
  if (e.direct) {
    out.field = *e.direct;
    return out;
  }
  const RegionUnion region = e.region.at(n);
  validate(region);
  out.J = region.rect_count();
  out.cardinality = cardinality(region);
  out.field = build_weights(*e.coeffs, region, e.alpha, L, e.weight_options);
  return out;
}

SlowVary effective_L(const Experiment& e) { return e.L ? *e.L : canonical_L(*e.innovations); }

struct LimitSpec {
  double c_alpha;
  double beta;
  double c_alpha_error = 0.0;
  bool estimated = false;
};

LimitSpec limit_spec(const Experiment& e) {
  const auto& kind = e.innovations->kind();
  if (const auto* s = std::get_if<InnovationModel::ExactStable>(&kind)) {
    return {s->law.c_alpha(), s->law.beta()};
  }
  const double beta = e.alpha == 1.0 ? 0.0 : e.innovations->skewness();
  if (e.c_alpha_override) return {*e.c_alpha_override, beta};
  const CAlphaEstimate est = estimate_c_alpha(*e.innovations, e.t_grid);
  return {est.value, beta, est.error, true};
}

std::string n_tag(Index n) { return n > 0 ? "_n" + std::to_string(n) : ""; }

// Known B_n exponents for the model families with a matching region shape.
std::optional<double> expected_slope(const Experiment& e) {
  if (!e.coeffs) return std::nullopt;
  const auto& kind = e.coeffs->kind();
  const double a = e.alpha;
  if (const auto* g = std::get_if<CoefficientModel::Geometric>(&kind)) {
    if (e.region.kind == "cube") return static_cast<double>(g->ratio.size()) / a;
  }
  if (const auto* f = std::get_if<CoefficientModel::Farima>(&kind)) {
    if (e.region.kind == "cube") {
      double s = 0.0;
      for (double b : f->memory) s += b;
      return s + static_cast<double>(f->memory.size()) / a;
    }
  }
  if (const auto* iso = std::get_if<CoefficientModel::Isotropic>(&kind)) {
    const double d = static_cast<double>(iso->dim);
    if (e.region.kind == "symbox" && iso->beta < d) return (1.0 + 1.0 / a) * d - iso->beta;
  }
  if (const auto* an = std::get_if<CoefficientModel::Anisotropic>(&kind)) {
    if (e.region.kind == "anisobox" && an->beta == e.region.beta) {
      double Q = 0.0;
      for (double b : an->beta) Q += 1.0 / b;
      if (an->gamma < Q) return (1.0 + 1.0 / a) * Q - an->gamma;
    }
  }
  return std::nullopt;
}

// (constant, exponent) of the rate n -> constant n^exponent used for the ratio column.
std::optional<std::pair<double, double>> rate_formula(const Experiment& e, const SlowVary& L) {
  if (e.rate_constant) return std::make_pair(*e.rate_constant, *e.rate_exponent);
  if (!e.coeffs || e.region.kind != "cube") return std::nullopt;
  const auto* g = std::get_if<CoefficientModel::Geometric>(&e.coeffs->kind());
  const auto* c = std::get_if<SlowVary::Constant>(&L.kind());
  if (g == nullptr || c == nullptr) return std::nullopt;
  double constant = std::pow(c->value, 1.0 / e.alpha);
  for (double t : g->ratio) constant /= std::fabs(1.0 - t);
  return std::make_pair(constant, static_cast<double>(g->ratio.size()) / e.alpha);
}

double fitted_slope(const std::vector<double>& n, const std::vector<double>& y, bool all) {
  std::vector<double> lx, ly;
  const std::size_t start = (all || n.size() < 4) ? 0 : n.size() / 2;
  for (std::size_t k = start; k < n.size(); ++k) {
    lx.push_back(std::log(n[k]));
    ly.push_back(std::log(y[k]));
  }
  return ols_slope(lx, ly);
}

Json run_mode(const Experiment& e, std::ostream& warn, Json& summary) {
  const std::filesystem::path& dir = e.out_dir;
  const SlowVary L = effective_L(e);
  Json results = Json::array();
  const bool summable = e.coeffs ? e.coeffs->ell1_finite() : true;

  if (e.mode == "tabulate") {
    const LimitSpec spec = limit_spec(e);
    const StableLaw law(e.alpha, spec.c_alpha, spec.beta);
    Csv csv(dir / "tabulate.csv", {"x", "pdf", "cdf"});
    for (std::size_t k = 0; k < e.tab_points; ++k) {
      const double x = e.tab_from + (e.tab_to - e.tab_from) * static_cast<double>(k) / static_cast<double>(e.tab_points - 1);
      csv.row(x, law.pdf(x), law.cdf(x));
    }
    summary["law"] = {{"alpha", e.alpha}, {"c_alpha", spec.c_alpha}, {"beta", spec.beta}};
    return results;
  }

  if (e.mode == "weights") {
    Csv csv(dir / "weights_summary.csv",
            {"n", "J", "cardinality", "size", "nonzero", "sup_b", "delta_n", "tail_energy_bound", "truncated"});
    for (Index n : e.region.n_values) {
      const Instance inst = make_instance(e, n, L);
      const WeightDiagnostics d = diagnostics(inst.field, 1.0);
      csv.row(n, inst.J, inst.cardinality, inst.field.size(), inst.field.nonzero_count(), d.sup_b, d.delta_n,
              inst.field.tail_energy_bound(), d.truncated);
      results.push_back({{"n", n}, {"J", inst.J}, {"cardinality", inst.cardinality}, {"nonzero", inst.field.nonzero_count()},
                         {"sup_b", d.sup_b}, {"delta_n", d.delta_n}, {"tail_energy_bound", inst.field.tail_energy_bound()}});
      if (e.write_weights) {
        std::ofstream out(dir / ("weights" + n_tag(n) + ".csv"));
        if (!out) fail(ErrorCode::kIo, "cannot write weights csv");
        write_csv(inst.field, out);
      }
    }
    return results;
  }

  if (e.mode == "normalize" || e.mode == "conditions") {
    const bool conditions = e.mode == "conditions";
    Csv csv(dir / (e.mode + ".csv"),
            conditions ? std::vector<std::string>{"n", "J", "B_n", "A1", "A2", "S1", "S2", "c_hat", "growth_q",
                                                  "growth_limit", "growth_applies", "growth_passes"}
                       : std::vector<std::string>{"n", "B_n", "residual", "s_plus", "s_minus", "c_hat", "rho_n",
                                                  "boundary", "grid_scan", "iterations"});
    for (Index n : e.region.n_values) {
      const Instance inst = make_instance(e, n, L);
      const NormalizerResult r = solve_Bn(inst.field, e.alpha, L, e.solver);
      if (conditions) {
        const ConditionReport c = check_conditions(inst.field, e.alpha, L, r.B_n);
        const GrowthGate gate =
            check_region_growth(std::max<std::size_t>(inst.J, 1), r.B_n, e.alpha, summable, e.growth_q, false);
        csv.row(n, inst.J, r.B_n, c.A1, c.A2, c.S1, c.S2, r.c_hat, gate.q, gate.limit, gate.applies, gate.passes);
        results.push_back({{"n", n}, {"B_n", r.B_n}, {"A1", c.A1}, {"A2", c.A2}, {"S1", c.S1}, {"S2", c.S2},
                           {"growth_passes", gate.passes}});
      } else {
        csv.row(n, r.B_n, r.residual, r.s_plus, r.s_minus, r.c_hat, r.rho_n, r.boundary, r.grid_scan, r.iterations);
        results.push_back({{"n", n}, {"B_n", r.B_n}, {"residual", r.residual}, {"s_plus", r.s_plus},
                           {"s_minus", r.s_minus}, {"c_hat", r.c_hat}, {"rho_n", r.rho_n}, {"boundary", r.boundary},
                           {"grid_scan", r.grid_scan}, {"iterations", r.iterations}});
      }
    }
    return results;
  }

  if (e.mode == "asymptotics") {
    const auto rate = rate_formula(e, L);
    Csv csv(dir / "asymptotics.csv",
            {"n", "J", "cardinality", "B_n", "sup_b", "rho_n", "delta_n", "ratio", "ratio_to_rate"});
    std::vector<double> ns, bs, sups;
    for (Index n : e.region.n_values) {
      const Instance inst = make_instance(e, n, L);
      const NormalizerResult r = solve_Bn(inst.field, e.alpha, L, e.solver);
      const WeightDiagnostics d = diagnostics(inst.field, r.B_n);
      // ratio tends to the rate constant, ratio_to_rate to 1.
      const double ratio = rate ? r.B_n / std::pow(static_cast<double>(n), rate->second) : std::nan("");
      const double ratio_to_rate = rate ? ratio / rate->first : std::nan("");
      csv.row(n, inst.J, inst.cardinality, r.B_n, d.sup_b, d.rho_n, d.delta_n, ratio, ratio_to_rate);
      Json row{{"n", n}, {"B_n", r.B_n}, {"sup_b", d.sup_b}, {"rho_n", d.rho_n}, {"delta_n", d.delta_n}};
      if (rate) {
        row["ratio"] = ratio;
        row["ratio_to_rate"] = ratio_to_rate;
      }
      results.push_back(row);
      ns.push_back(static_cast<double>(n));
      bs.push_back(r.B_n);
      sups.push_back(d.sup_b);
    }
    if (ns.size() >= 2 && ns.front() > 0.0) {
      summary["slope_B_n"] = fitted_slope(ns, bs, e.fit_all);
      summary["slope_sup_b"] = fitted_slope(ns, sups, e.fit_all);
      summary["slope_B_n_all"] = fitted_slope(ns, bs, true);
      summary["slope_sup_b_all"] = fitted_slope(ns, sups, true);
    }
    if (const auto s = expected_slope(e)) summary["expected_slope_B_n"] = *s;
    if (rate) summary["rate"] = {{"constant", rate->first}, {"exponent", rate->second}};
    return results;
  }

  // simulate, llt
  const LimitSpec spec = limit_spec(e);
  summary["c_alpha"] = spec.c_alpha;
  summary["beta"] = spec.beta;
  if (spec.estimated) summary["c_alpha_error"] = spec.c_alpha_error;
  const bool llt = e.mode == "llt";
  std::optional<Csv> sim_csv, llt_csv, int_csv;
  if (llt) {
    llt_csv.emplace(dir / "llt.csv", std::vector<std::string>{"n", "B_n", "u", "m", "estimate", "target", "std_err", "z"});
    int_csv.emplace(dir / "intervals.csv",
                    std::vector<std::string>{"n", "B_n", "a", "b", "estimate", "target", "std_err", "z", "noisy"});
  } else {
    sim_csv.emplace(dir / "simulate.csv",
                    std::vector<std::string>{"n", "B_n", "c_hat", "c_alpha", "beta", "replicates", "excluded", "ks"});
  }
  for (Index n : e.region.n_values) {
    const Instance inst = make_instance(e, n, L);
    const NormalizerResult r = solve_Bn(inst.field, e.alpha, L, e.solver);
    if (!e.direct) check_region_growth(inst.J, r.B_n, e.alpha, summable, e.growth_q, true);
    SimPlan plan;
    plan.field = &inst.field;
    plan.innovations = *e.innovations;
    plan.B_n = r.B_n;
    plan.replicates = e.replicates;
    plan.master_seed = e.seed;
    plan.threads = e.threads;
    const SimResult sim = simulate(plan);
    if (!sim.excluded.empty()) {
      warn << "warning: n=" << n << ": " << sim.excluded.size() << " replicates had a non-finite sum and were excluded\n";
    }
    const StableLimitLaw law = limit_law(r.c_hat, e.alpha, spec.c_alpha, spec.beta);
    if (e.write_samples) write_sample_file((dir / ("samples" + n_tag(n) + ".bin")).string(), {r.B_n, e.alpha, sim.samples});

    if (!llt) {
      const double ks = ks_against(sim.samples, law, e.threads);
      sim_csv->row(n, r.B_n, r.c_hat, spec.c_alpha, spec.beta, sim.samples.size(), sim.excluded.size(), ks);
      results.push_back({{"n", n}, {"B_n", r.B_n}, {"c_hat", r.c_hat}, {"replicates", sim.samples.size()},
                         {"excluded", sim.excluded.size()}, {"ks", ks}});
      continue;
    }
    std::vector<double> u = e.u;
    for (double f : e.u_over_B) u.push_back(f * r.B_n);
    Json rows = Json::array();
    for (const LltRow& row : llt_estimate(sim, *e.m, u, law)) {
      const double z = row.std_err > 0.0 ? (row.estimate - row.target) / row.std_err : std::nan("");
      llt_csv->row(n, r.B_n, row.u, row.m, row.estimate, row.target, row.std_err, z);
      rows.push_back({{"u", row.u}, {"estimate", row.estimate}, {"target", row.target}, {"std_err", row.std_err}});
    }
    Json ints = Json::array();
    for (const auto& [a, b] : e.intervals) {
      const IntervalRow row = interval_prob(sim, a, b, law);
      const double z = row.std_err > 0.0 ? (row.estimate - row.target) / row.std_err : std::nan("");
      int_csv->row(n, r.B_n, a, b, row.estimate, row.target, row.std_err, z, row.noisy);
      if (row.noisy) {
        warn << "warning: n=" << n << ": interval (" << a << ", " << b
             << "] estimate is dominated by noise (std_err > estimate)\n";
      }
      ints.push_back({{"a", a}, {"b", b}, {"estimate", row.estimate}, {"target", row.target},
                      {"std_err", row.std_err}, {"noisy", row.noisy}});
    }
    results.push_back({{"n", n}, {"B_n", r.B_n}, {"c_hat", r.c_hat}, {"replicates", sim.samples.size()},
                       {"excluded", sim.excluded.size()}, {"llt", rows}, {"intervals", ints}});
  }
  return results;
}

Json nan_to_null(Json j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) return nullptr;
  if (j.is_structured()) {
    for (auto& v : j) v = nan_to_null(v);
  }
  return j;
}

}  // namespace

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::kValidation, "slope fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::kValidation, "slope fit needs distinct x values");
  return sxy / sxx;
}

Json run_experiment(Json config, const RunOptions& options, std::ostream& warn) {
  const auto start = std::chrono::steady_clock::now();
  if (!config.is_object()) config_fail("config must be a table");
  if (options.mode) config["mode"] = *options.mode;
  if (options.seed) config["seed"] = static_cast<std::int64_t>(*options.seed);
  if (options.out_dir) {
    if (!config.contains("outputs")) config["outputs"] = Json::object();
    config["outputs"]["dir"] = *options.out_dir;
  }
  const Experiment e = parse_experiment(config);

  std::error_code ec;
  std::filesystem::create_directories(e.out_dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create output directory " + e.out_dir.string() + ": " + ec.message());

  Json summary;
  summary["version"] = STABLEFIELD_VERSION_STRING;
  summary["mode"] = e.mode;
  summary["config"] = config;
  summary["results"] = run_mode(e, warn, summary);
  summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary = nan_to_null(std::move(summary));

  std::ofstream echo(e.out_dir / "config_echo.cfg");
  if (!echo) fail(ErrorCode::kIo, "cannot write config_echo.cfg");
  echo << emit_config(config);

  std::ofstream out(e.out_dir / "summary.json");
  if (!out) fail(ErrorCode::kIo, "cannot write summary.json");
  out << summary.dump(2) << '\n';
  return summary;
}

}  // namespace stablefield::cli
