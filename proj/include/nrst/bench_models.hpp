#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nrst/model.hpp"
#include "nrst/rng.hpp"

namespace nrst {

/// Model name, numeric parameter overrides and the seed of its synthetic
/// dataset (for models that need one).
struct ModelSpec {
  std::string name;
  std::map<std::string, double> params;
  std::uint64_t data_seed = 1;

  double param(const std::string& key, double fallback) const;
};

/// Column-named table; every row has one value per column.
struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

std::vector<std::string> available_models();

/// Throws UnknownModel for unrecognized names and InvalidArgument for
/// unknown or out-of-domain parameters.
std::unique_ptr<TemperedModel> make_model(const ModelSpec& spec);

/// Deterministic per rng state. Models without data return an empty table.
Dataset generate_synthetic_data(const ModelSpec& spec, Rng& rng);

struct GaussianPathPoint {
  double mean = 0.0;      // per coordinate
  double variance = 0.0;  // per coordinate
  double log_z = 0.0;     // whole d-dimensional normalizer
};

/// Path moments of the toy Gaussian; log Z by Gauss-Hermite quadrature.
GaussianPathPoint analytic_gaussian_path(std::size_t d, double m, double sigma0, double beta);

/// Nodes and weights of the n-point Gauss-Hermite rule (weight e^{-t^2}).
void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// y | x ~ N(x, I) with y = m 1 and x ~ N(0, sigma0^2 I).
class ToyGaussian final : public TemperedModel {
 public:
  ToyGaussian(std::size_t d, double m, double sigma0);

  std::string name() const override { return "toy_gaussian"; }
  std::size_t dim() const override { return d_; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;

  double m() const { return m_; }
  double sigma0() const { return sigma0_; }

 protected:
  double evaluate_potential(std::span<const double> x) const override;

 private:
  std::size_t d_;
  double m_;
  double sigma0_;
};

/// x1 ~ N(1, 10), x2 | x1 ~ N(x1^2, 0.01); reference x2 ~ N(11, 100).
class Banana final : public TemperedModel {
 public:
  std::string name() const override { return "banana"; }
  std::size_t dim() const override { return 2; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;

 protected:
  double evaluate_potential(std::span<const double> x) const override;
};

/// x1 ~ N(0, 9), x_i | x1 ~ N(0, e^{x1}); reference iid N(0, 9).
class Funnel final : public TemperedModel {
 public:
  explicit Funnel(std::size_t d = 20);

  std::string name() const override { return "funnel"; }
  std::size_t dim() const override { return d_; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;

 protected:
  double evaluate_potential(std::span<const double> x) const override;

 private:
  std::size_t d_;
};

/// Normal means with Cauchy location prior and inverse-gamma variances.
/// Coordinates: (mu, log tau^2, log sigma^2, theta_1..theta_J).
class Hierarchical final : public TemperedModel {
 public:
  Hierarchical(std::size_t groups, std::vector<int> group_of, std::vector<double> y);

  std::string name() const override { return "hierarchical"; }
  std::size_t dim() const override { return 3 + groups_; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;

 protected:
  double evaluate_potential(std::span<const double> x) const override;

 private:
  std::size_t groups_;
  std::vector<int> group_of_;
  std::vector<double> y_;
};

/// Two-compartment transfection kinetics. Coordinates are logits of the
/// log10 parameters within their uniform prior bounds, in the order
/// (t0, kappa, beta, delta, sigma).
class MrnaTransfection final : public TemperedModel {
 public:
  MrnaTransfection(std::vector<double> t, std::vector<double> y);

  std::string name() const override { return "mrna"; }
  std::size_t dim() const override { return 5; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;
  std::vector<TestFunction> test_functions() const override;

  /// (t0, kappa, beta, delta, sigma) from unconstrained coordinates.
  static std::vector<double> natural(std::span<const double> x);
  static double mean_curve(double t, double t0, double kappa, double beta, double delta);

 protected:
  double evaluate_potential(std::span<const double> x) const override;

 private:
  std::vector<double> t_;
  std::vector<double> y_;
};

/// Three-parameter Weibull with threshold a. Coordinates are
/// (logit a/200, log b, logit (c - 0.1)/9.9). V = +inf when a >= min y.
class ThresholdWeibull final : public TemperedModel {
 public:
  explicit ThresholdWeibull(std::vector<double> y);

  std::string name() const override { return "threshold_weibull"; }
  std::size_t dim() const override { return 3; }
  bool potential_may_be_infinite() const override { return true; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;
  std::vector<TestFunction> test_functions() const override;

  /// (a, b, c) from unconstrained coordinates.
  static std::vector<double> natural(std::span<const double> x);

 protected:
  double evaluate_potential(std::span<const double> x) const override;

 private:
  std::vector<double> y_;
};

/// Nearest-neighbour XY model on an n x n torus, reference uniform on
/// [-pi, pi)^{n^2}.
class XYModel final : public TemperedModel {
 public:
  XYModel(std::size_t n = 8, double coupling = 2.0);

  std::string name() const override { return "xy"; }
  std::size_t dim() const override { return n_ * n_; }
  Point sample_reference(Rng& rng) const override;
  double log_reference(std::span<const double> x) const override;

  std::size_t num_edges() const { return edges_.size(); }

 protected:
  double evaluate_potential(std::span<const double> x) const override;

 private:
  std::size_t n_;
  double coupling_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

}  // namespace nrst
