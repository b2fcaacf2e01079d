#include "nrst/bench_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "nrst/errors.hpp"

namespace nrst {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
const double kLog2Pi = std::log(2.0 * kPi);

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * d * d / var;
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double log_sigmoid(double u) {
  return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

// Density of u = logit(U) with U ~ Uniform(0, 1).
double log_logistic(double u) { return log_sigmoid(u) + log_sigmoid(-u); }

double sample_logistic(Rng& rng) {
  const double p = rng.uniform();
  return std::log(p) - std::log1p(-p);
}

// log X for X ~ InverseGamma(shape, rate): density of l = log X.
double log_inv_gamma_log_space(double l, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - shape * l - rate * std::exp(-l);
}

// log G = log Gamma(shape + 1) + log(U) / shape stays finite for small shapes.
double sample_log_inv_gamma(Rng& rng, double shape, double rate) {
  const double log_g =
      std::log(rng.gamma(shape + 1.0, 1.0 / rate)) + std::log(rng.uniform()) / shape;
  return -log_g;
}

double log_cauchy(double x) { return -std::log(kPi) - std::log1p(x * x); }

void check_params(const ModelSpec& spec, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : spec.params) {
    if (!ok.contains(key)) {
      throw InvalidArgument("model '" + spec.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw InvalidArgument("parameter '" + key + "' must be finite");
    }
  }
}

std::size_t count_param(const ModelSpec& spec, const std::string& key, double fallback,
                        std::size_t min_value) {
  const double v = spec.param(key, fallback);
  if (v != std::floor(v) || v < static_cast<double>(min_value)) {
    throw InvalidArgument("parameter '" + key + "' must be an integer >= " +
                          std::to_string(min_value));
  }
  return static_cast<std::size_t>(v);
}

double positive_param(const ModelSpec& spec, const std::string& key, double fallback) {
  const double v = spec.param(key, fallback);
  if (!(v > 0.0)) throw InvalidArgument("parameter '" + key + "' must be positive");
  return v;
}

const std::vector<std::string> kModels = {"toy_gaussian", "banana", "funnel", "hierarchical",
                                          "mrna", "threshold_weibull", "xy"};

struct MrnaPrior {
  double lo;
  double hi;
};
constexpr MrnaPrior kMrnaPriors[5] = {{-2, 1}, {-5, 5}, {-5, 5}, {-5, 5}, {-2, 5}};

constexpr double kWeibullAMax = 200.0;
constexpr double kWeibullCMin = 0.1;
constexpr double kWeibullCMax = 10.0;
constexpr double kInvGammaShape = 0.1;
constexpr double kInvGammaRate = 0.1;

Dataset hierarchical_data(const ModelSpec& spec, Rng& rng) {
  const std::size_t groups = count_param(spec, "J", 8, 2);
  const std::size_t per_group = count_param(spec, "M", 20, 2);
  const double ratio_lo = 12.0;
  const double ratio_hi = 20.0;
  const double sigma2_lo = 0.1;
  const double sigma2_hi = 10.0;

  std::vector<double> theta(groups);
  std::vector<double> y(groups * per_group);
  for (int attempt = 0; attempt < 10'000'000; ++attempt) {
    const double mu = std::tan(kPi * (rng.uniform() - 0.5));
    const double tau2 = std::exp(sample_log_inv_gamma(rng, kInvGammaShape, kInvGammaRate));
    const double sigma2 = std::exp(sample_log_inv_gamma(rng, kInvGammaShape, kInvGammaRate));
    if (sigma2 < sigma2_lo || sigma2 > sigma2_hi || !std::isfinite(tau2)) continue;

    std::vector<double> means(groups, 0.0);
    for (std::size_t j = 0; j < groups; ++j) {
      theta[j] = rng.normal(mu, std::sqrt(tau2));
      for (std::size_t i = 0; i < per_group; ++i) {
        y[j * per_group + i] = rng.normal(theta[j], std::sqrt(sigma2));
        means[j] += y[j * per_group + i];
      }
      means[j] /= static_cast<double>(per_group);
    }
    const double grand =
        std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(groups);
    double between = 0.0;
    for (double m : means) between += (m - grand) * (m - grand);
    between /= static_cast<double>(groups - 1);
    double within = 0.0;
    for (std::size_t j = 0; j < groups; ++j) {
      for (std::size_t i = 0; i < per_group; ++i) {
        const double d = y[j * per_group + i] - means[j];
        within += d * d;
      }
    }
    within /= static_cast<double>(groups * (per_group - 1));
    const double ratio = between / within;
    if (ratio >= ratio_lo && ratio <= ratio_hi) {
      Dataset data;
      data.columns = {"group", "y"};
      for (std::size_t j = 0; j < groups; ++j) {
        for (std::size_t i = 0; i < per_group; ++i) {
          data.rows.push_back({static_cast<double>(j), y[j * per_group + i]});
        }
      }
      return data;
    }
  }
  throw InsufficientData("hierarchical data generator exhausted its attempts");
}

Dataset mrna_data(const ModelSpec& spec, Rng& rng) {
  const std::size_t n = count_param(spec, "n_obs", 30, 2);
  const double t0 = 0.2, kappa = 1.0, beta = 0.8, delta = 1.2, sigma = 0.1;
  Dataset data;
  data.columns = {"t", "y"};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 10.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double mu = MrnaTransfection::mean_curve(t, t0, kappa, beta, delta);
    data.rows.push_back({t, rng.normal(mu, sigma)});
  }
  return data;
}

Dataset weibull_data(const ModelSpec& spec, Rng& rng) {
  const std::size_t n = count_param(spec, "n", 50, 1);
  const double a = spec.param("a", 10.0);
  const double b = positive_param(spec, "b", 2.0);
  const double c = positive_param(spec, "c", 1.5);
  if (!(a >= 0.0)) throw InvalidArgument("parameter 'a' must be >= 0");
  Dataset data;
  data.columns = {"y"};
  for (std::size_t i = 0; i < n; ++i) {
    data.rows.push_back({a + b * std::pow(rng.exponential(), 1.0 / c)});
  }
  return data;
}

}  // namespace

double ModelSpec::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::vector<double> Dataset::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("dataset has no column '" + name + "'");
  const auto j = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

std::vector<std::string> available_models() { return kModels; }

std::unique_ptr<TemperedModel> make_model(const ModelSpec& spec) {
  const auto& name = spec.name;
  if (name == "toy_gaussian") {
    check_params(spec, {"d", "m", "sigma0"});
    return std::make_unique<ToyGaussian>(count_param(spec, "d", 3, 1), spec.param("m", 2.0),
                                         positive_param(spec, "sigma0", 2.0));
  }
  if (name == "banana") {
    check_params(spec, {});
    return std::make_unique<Banana>();
  }
  if (name == "funnel") {
    check_params(spec, {"d"});
    return std::make_unique<Funnel>(count_param(spec, "d", 20, 2));
  }
  if (name == "xy") {
    check_params(spec, {"n", "J"});
    return std::make_unique<XYModel>(count_param(spec, "n", 8, 3), spec.param("J", 2.0));
  }

  Rng rng(spec.data_seed);
  if (name == "hierarchical") {
    check_params(spec, {"J", "M"});
    const auto data = hierarchical_data(spec, rng);
    std::vector<int> group;
    for (double g : data.column("group")) group.push_back(static_cast<int>(g));
    return std::make_unique<Hierarchical>(count_param(spec, "J", 8, 2), std::move(group),
                                          data.column("y"));
  }
  if (name == "mrna") {
    check_params(spec, {"n_obs"});
    const auto data = mrna_data(spec, rng);
    return std::make_unique<MrnaTransfection>(data.column("t"), data.column("y"));
  }
  if (name == "threshold_weibull") {
    check_params(spec, {"n", "a", "b", "c"});
    return std::make_unique<ThresholdWeibull>(weibull_data(spec, rng).column("y"));
  }
  throw UnknownModel(name, kModels);
}

Dataset generate_synthetic_data(const ModelSpec& spec, Rng& rng) {
  if (spec.name == "hierarchical") return hierarchical_data(spec, rng);
  if (spec.name == "mrna") return mrna_data(spec, rng);
  if (spec.name == "threshold_weibull") return weibull_data(spec, rng);
  if (std::find(kModels.begin(), kModels.end(), spec.name) == kModels.end()) {
    throw UnknownModel(spec.name, kModels);
  }
  return {};
}

namespace {

/// Orthonormal Hermite function of degree n at z, and its derivative factor.
std::pair<double, double> hermite_pair(std::size_t n, double z) {
  double p1 = std::pow(kPi, -0.25);
  double p2 = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    const auto jd = static_cast<double>(j);
    p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
  }
  return {p1, std::sqrt(2.0 * static_cast<double>(n)) * p2};
}

}  // namespace

void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidArgument("Gauss-Hermite rule needs n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const auto nd = static_cast<double>(n);
  // Positive roots are bracketed by a scan finer than the minimal root spacing,
  // then refined by bisection.
  const double upper = std::sqrt(2.0 * nd + 1.0) + 1.0;
  const double step = 0.1 / std::sqrt(2.0 * nd + 1.0);
  std::vector<double> roots;
  double hi = upper;
  double f_hi = hermite_pair(n, hi).first;
  while (hi > step && roots.size() < n / 2) {
    const double lo = std::max(hi - step, 0.5 * step);
    const double f_lo = hermite_pair(n, lo).first;
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      double a = lo, b = hi, fa = f_lo;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = hermite_pair(n, mid).first;
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    hi = lo;
    f_hi = f_lo;
  }
  if (roots.size() != n / 2) throw NumericalFailure("Gauss-Hermite root search failed");
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double pp = hermite_pair(n, roots[i]).second;
    nodes[i] = roots[i];
    nodes[n - 1 - i] = -roots[i];
    weights[i] = weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  if (n % 2 == 1) {
    const double pp = hermite_pair(n, 0.0).second;
    nodes[n / 2] = 0.0;
    weights[n / 2] = 2.0 / (pp * pp);
  }
}

GaussianPathPoint analytic_gaussian_path(std::size_t d, double m, double sigma0, double beta) {
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(sigma0 > 0.0)) throw InvalidArgument("sigma0 must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0,1]");
  GaussianPathPoint p;
  p.variance = 1.0 / (beta + 1.0 / (sigma0 * sigma0));
  p.mean = beta * m * p.variance;
  if (beta == 0.0) return p;

  static const auto rule = [] {
    std::pair<std::vector<double>, std::vector<double>> r;
    gauss_hermite(200, r.first, r.second);
    return r;
  }();
  const auto& [t, w] = rule;
  std::vector<double> terms(t.size());
  double mx = -kInf;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double x = std::sqrt(2.0) * sigma0 * t[k];
    const double v = 0.5 * (x - m) * (x - m) + 0.5 * kLog2Pi;
    terms[k] = std::log(w[k]) - beta * v;
    mx = std::max(mx, terms[k]);
  }
  double s = 0.0;
  for (double term : terms) s += std::exp(term - mx);
  const double per_dim = mx + std::log(s) - 0.5 * std::log(kPi);
  p.log_z = static_cast<double>(d) * per_dim;
  return p;
}

ToyGaussian::ToyGaussian(std::size_t d, double m, double sigma0) : d_(d), m_(m), sigma0_(sigma0) {
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(sigma0 > 0.0)) throw InvalidArgument("sigma0 must be positive");
}

Point ToyGaussian::sample_reference(Rng& rng) const {
  Point x(d_);
  for (auto& xi : x) xi = rng.normal(0.0, sigma0_);
  return x;
}

double ToyGaussian::log_reference(std::span<const double> x) const {
  double s = 0.0;
  for (double xi : x) s += log_normal(xi, 0.0, sigma0_ * sigma0_);
  return s;
}

double ToyGaussian::evaluate_potential(std::span<const double> x) const {
  double s = 0.0;
  for (double xi : x) s += 0.5 * (xi - m_) * (xi - m_);
  return s + 0.5 * static_cast<double>(d_) * kLog2Pi;
}

Point Banana::sample_reference(Rng& rng) const {
  return {rng.normal(1.0, std::sqrt(10.0)), rng.normal(11.0, 10.0)};
}

double Banana::log_reference(std::span<const double> x) const {
  return log_normal(x[0], 1.0, 10.0) + log_normal(x[1], 11.0, 100.0);
}

double Banana::evaluate_potential(std::span<const double> x) const {
  return -log_normal(x[1], x[0] * x[0], 0.01) + log_normal(x[1], 11.0, 100.0);
}

Funnel::Funnel(std::size_t d) : d_(d) {
  if (d < 2) throw InvalidArgument("funnel needs d >= 2");
}

Point Funnel::sample_reference(Rng& rng) const {
  Point x(d_);
  for (auto& xi : x) xi = rng.normal(0.0, 3.0);
  return x;
}

double Funnel::log_reference(std::span<const double> x) const {
  double s = 0.0;
  for (double xi : x) s += log_normal(xi, 0.0, 9.0);
  return s;
}

double Funnel::evaluate_potential(std::span<const double> x) const {
  const double scale = std::exp(x[0]);
  double v = 0.0;
  for (std::size_t i = 1; i < d_; ++i) {
    v += -log_normal(x[i], 0.0, scale) + log_normal(x[i], 0.0, 9.0);
  }
  return v;
}

Hierarchical::Hierarchical(std::size_t groups, std::vector<int> group_of, std::vector<double> y)
    : groups_(groups), group_of_(std::move(group_of)), y_(std::move(y)) {
  if (groups_ < 1) throw InvalidArgument("need at least one group");
  if (group_of_.size() != y_.size() || y_.empty()) {
    throw InvalidArgument("group labels and observations differ in length");
  }
  for (int g : group_of_) {
    if (g < 0 || static_cast<std::size_t>(g) >= groups_) {
      throw InvalidArgument("group label out of range");
    }
  }
}

Point Hierarchical::sample_reference(Rng& rng) const {
  Point x(dim());
  x[0] = std::tan(kPi * (rng.uniform() - 0.5));
  x[1] = sample_log_inv_gamma(rng, kInvGammaShape, kInvGammaRate);
  x[2] = sample_log_inv_gamma(rng, kInvGammaShape, kInvGammaRate);
  const double tau = std::exp(0.5 * x[1]);
  for (std::size_t j = 0; j < groups_; ++j) x[3 + j] = rng.normal(x[0], tau);
  return x;
}

double Hierarchical::log_reference(std::span<const double> x) const {
  double s = log_cauchy(x[0]) + log_inv_gamma_log_space(x[1], kInvGammaShape, kInvGammaRate) +
             log_inv_gamma_log_space(x[2], kInvGammaShape, kInvGammaRate);
  for (std::size_t j = 0; j < groups_; ++j) {
    const double d = x[3 + j] - x[0];
    s += -0.5 * (kLog2Pi + x[1]) - 0.5 * d * d * std::exp(-x[1]);
  }
  return s;
}

double Hierarchical::evaluate_potential(std::span<const double> x) const {
  const double inv_var = std::exp(-x[2]);
  double v = 0.0;
  for (std::size_t k = 0; k < y_.size(); ++k) {
    const double d = y_[k] - x[3 + static_cast<std::size_t>(group_of_[k])];
    v += 0.5 * (kLog2Pi + x[2]) + 0.5 * d * d * inv_var;
  }
  return v;
}

MrnaTransfection::MrnaTransfection(std::vector<double> t, std::vector<double> y)
    : t_(std::move(t)), y_(std::move(y)) {
  if (t_.size() != y_.size() || t_.empty()) {
    throw InvalidArgument("time points and observations differ in length");
  }
}

std::vector<double> MrnaTransfection::natural(std::span<const double> x) {
  std::vector<double> p(5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto [lo, hi] = kMrnaPriors[k];
    p[k] = std::pow(10.0, lo + (hi - lo) * sigmoid(x[k]));
  }
  return p;
}

double MrnaTransfection::mean_curve(double t, double t0, double kappa, double beta, double delta) {
  const double s = t - t0;
  if (s <= 0.0) return 0.0;
  const double a = std::min(beta, delta);
  const double d = std::max(beta, delta) - a;
  const double decay = std::exp(-a * s);
  if (d * s < 1e-300) return kappa * s * decay;
  return kappa * decay * (-std::expm1(-d * s)) / d;
}

Point MrnaTransfection::sample_reference(Rng& rng) const {
  Point x(5);
  for (auto& xi : x) xi = sample_logistic(rng);
  return x;
}

double MrnaTransfection::log_reference(std::span<const double> x) const {
  double s = 0.0;
  for (double xi : x) s += log_logistic(xi);
  return s;
}

std::vector<TestFunction> MrnaTransfection::test_functions() const {
  static const char* names[5] = {"t0", "kappa", "beta", "delta", "sigma"};
  std::vector<TestFunction> out;
  for (std::size_t k = 0; k < 5; ++k) {
    out.push_back({names[k], [k](std::span<const double> x) { return natural(x)[k]; }});
  }
  return out;
}

double MrnaTransfection::evaluate_potential(std::span<const double> x) const {
  const auto p = natural(x);
  const double var = p[4] * p[4];
  double v = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    v -= log_normal(y_[i], mean_curve(t_[i], p[0], p[1], p[2], p[3]), var);
  }
  return v;
}

ThresholdWeibull::ThresholdWeibull(std::vector<double> y) : y_(std::move(y)) {
  if (y_.empty()) throw InvalidArgument("need at least one observation");
  for (double yi : y_) {
    if (!std::isfinite(yi)) throw InvalidArgument("observations must be finite");
  }
}

std::vector<double> ThresholdWeibull::natural(std::span<const double> x) {
  return {kWeibullAMax * sigmoid(x[0]), std::exp(x[1]),
          kWeibullCMin + (kWeibullCMax - kWeibullCMin) * sigmoid(x[2])};
}

Point ThresholdWeibull::sample_reference(Rng& rng) const {
  return {sample_logistic(rng), sample_log_inv_gamma(rng, kInvGammaShape, kInvGammaRate),
          sample_logistic(rng)};
}

double ThresholdWeibull::log_reference(std::span<const double> x) const {
  return log_logistic(x[0]) + log_inv_gamma_log_space(x[1], kInvGammaShape, kInvGammaRate) +
         log_logistic(x[2]);
}

std::vector<TestFunction> ThresholdWeibull::test_functions() const {
  static const char* names[3] = {"a", "b", "c"};
  std::vector<TestFunction> out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.push_back({names[k], [k](std::span<const double> x) { return natural(x)[k]; }});
  }
  return out;
}

double ThresholdWeibull::evaluate_potential(std::span<const double> x) const {
  const auto p = natural(x);
  const double a = p[0];
  const double log_b = x[1];
  const double c = p[2];
  double v = 0.0;
  for (double yi : y_) {
    if (yi <= a) return kInf;
    const double log_z = std::log(yi - a) - log_b;
    v -= std::log(c) - log_b + (c - 1.0) * log_z - std::exp(c * log_z);
  }
  return v;
}

XYModel::XYModel(std::size_t n, double coupling) : n_(n), coupling_(coupling) {
  if (n < 3) throw InvalidArgument("XY lattice side must be >= 3");
  if (!std::isfinite(coupling)) throw InvalidArgument("coupling must be finite");
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t site = r * n + c;
      edges_.emplace_back(site, r * n + (c + 1) % n);
      edges_.emplace_back(site, ((r + 1) % n) * n + c);
    }
  }
}

Point XYModel::sample_reference(Rng& rng) const {
  Point x(dim());
  for (auto& xi : x) xi = rng.uniform(-kPi, kPi);
  return x;
}

double XYModel::log_reference(std::span<const double> x) const {
  for (double xi : x) {
    if (!(xi >= -kPi && xi < kPi)) return -kInf;
  }
  return -static_cast<double>(dim()) * std::log(2.0 * kPi);
}

double XYModel::evaluate_potential(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [i, j] : edges_) s += std::cos(x[i] - x[j]);
  return -coupling_ * s;
}

}  // namespace nrst
