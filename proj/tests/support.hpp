#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "nrst/bench_models.hpp"
#include "nrst/explore.hpp"
#include "nrst/model.hpp"

namespace nrst::testing {

/// V(x) = value everywhere; reference N(0, 1)^dim.
class ConstantModel final : public TemperedModel {
 public:
  explicit ConstantModel(double value = 0.0, std::size_t dim = 1) : value_(value), dim_(dim) {}
  std::string name() const override { return "constant"; }
  std::size_t dim() const override { return dim_; }
  Point sample_reference(Rng& rng) const override {
    Point x(dim_);
    for (auto& xi : x) xi = rng.normal();
    return x;
  }
  double log_reference(std::span<const double> x) const override {
    double s = 0.0;
    for (double xi : x) s += -0.5 * xi * xi - 0.5 * std::log(2.0 * M_PI);
    return s;
  }

 protected:
  double evaluate_potential(std::span<const double>) const override { return value_; }

 private:
  double value_;
  std::size_t dim_;
};

/// Reference is a point mass at 0; V is the constant v.
class PointModel final : public TemperedModel {
 public:
  explicit PointModel(double v) : v_(v) {}
  std::string name() const override { return "point"; }
  std::size_t dim() const override { return 1; }
  Point sample_reference(Rng&) const override { return {0.0}; }
  double log_reference(std::span<const double>) const override { return 0.0; }

 protected:
  double evaluate_potential(std::span<const double>) const override { return v_; }

 private:
  double v_;
};

/// Leaves x unchanged.
class IdentityExplorer final : public Explorer {
 public:
  double explore(Point&, double v, double, int, PotentialEvaluator&, Rng&) const override {
    return v;
  }
};

/// Perfect exploration for the toy Gaussian: an exact draw from pi_beta.
class ExactGaussianExplorer final : public Explorer {
 public:
  explicit ExactGaussianExplorer(const ToyGaussian& model) : model_(&model) {}
  double explore(Point& x, double, double beta, int, PotentialEvaluator& eval,
                 Rng& rng) const override {
    const auto p = analytic_gaussian_path(model_->dim(), model_->m(), model_->sigma0(), beta);
    for (auto& xi : x) xi = rng.normal(p.mean, std::sqrt(p.variance));
    return eval(x);
  }

 private:
  const ToyGaussian* model_;
};

/// Closed-form log Z(beta) of the toy Gaussian (completing the square).
inline double toy_log_z(std::size_t d, double m, double sigma0, double beta) {
  const double s2 = sigma0 * sigma0;
  const double per = -0.5 * std::log1p(beta * s2) - beta * m * m / (2.0 * (1.0 + beta * s2)) -
                     0.5 * beta * std::log(2.0 * M_PI);
  return static_cast<double>(d) * per;
}

/// E^{(beta)}[V] for the toy Gaussian.
inline double toy_mean_v(std::size_t d, double m, double sigma0, double beta) {
  const double var = 1.0 / (beta + 1.0 / (sigma0 * sigma0));
  const double mu = beta * m * var;
  return 0.5 * static_cast<double>(d) * (var + (mu - m) * (mu - m) + std::log(2.0 * M_PI));
}

inline double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Standard error of the mean by non-overlapping batch means.
inline double batch_means_se(std::span<const double> xs, std::size_t batches = 50) {
  const std::size_t b = xs.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t k = 0; k < batches; ++k) means[k] = mean_of(xs.subspan(k * b, b));
  const double m = mean_of(means);
  double v = 0.0;
  for (double x : means) v += (x - m) * (x - m);
  v /= static_cast<double>(batches - 1);
  return std::sqrt(v / static_cast<double>(batches));
}

/// Two-sided Kolmogorov-Smirnov statistic sup |F_n - F|.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Critical value of the KS statistic at level 0.01 (asymptotic).
inline double ks_critical_01(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace nrst::testing
