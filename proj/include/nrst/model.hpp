#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nrst/rng.hpp"

namespace nrst {

using Point = std::vector<double>;

/// Named scalar function of the state, estimated at the target level.
struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

/// Tempered path pi_beta(x) ∝ pi_0(x) exp(-beta V(x)) between a reference
/// pi_0 with exact sampling and the target at beta = 1.
///
/// Instances are shared read-only across concurrent tours. The only mutable
/// member is the running count of potential evaluations.
class TemperedModel {
 public:
  virtual ~TemperedModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Point sample_reference(Rng& rng) const = 0;
  virtual double log_reference(std::span<const double> x) const = 0;

  /// True when V = +inf marks a region of zero likelihood (e.g. a threshold
  /// parameter above the smallest observation). Such values are then legal
  /// and give zero tempered density for beta > 0.
  virtual bool potential_may_be_infinite() const { return false; }

  /// Functions reported by the runner; defaults to the coordinates.
  virtual std::vector<TestFunction> test_functions() const;

  /// V(x). Increments the evaluation counter; performs no validation.
  double potential(std::span<const double> x) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    return evaluate_potential(x);
  }

  std::uint64_t potential_evaluations() const noexcept {
    return evaluations_.load(std::memory_order_relaxed);
  }
  void reset_potential_evaluations() noexcept { evaluations_.store(0, std::memory_order_relaxed); }

 protected:
  virtual double evaluate_potential(std::span<const double> x) const = 0;

 private:
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

/// Evaluates V on behalf of a single tour or chain and keeps a local count.
/// Throws DivergedPotential on values the model does not allow.
class PotentialEvaluator {
 public:
  explicit PotentialEvaluator(const TemperedModel& model) : model_(&model) {}

  double operator()(std::span<const double> x);

  const TemperedModel& model() const { return *model_; }
  std::uint64_t count() const noexcept { return count_; }

 private:
  const TemperedModel* model_;
  std::uint64_t count_ = 0;
};

/// Grid, level affinities and per-level exploration step counts.
struct Schedule {
  std::vector<double> betas;        // 0 = beta_0 < ... < beta_N = 1
  std::vector<double> affinities;   // c_0 = 0
  std::vector<int> explore_steps;   // n_i for levels 1..N

  std::size_t top_level() const { return betas.size() - 1; }

  /// Throws InvalidArgument when any structural invariant fails.
  void validate() const;

  /// Uniform grid {i/N} with zero affinities and one exploration step.
  static Schedule uniform(std::size_t n_levels);
};

/// Metropolis acceptance of a tempering move:
/// exp(-max{0, (beta_to - beta_from) v - (c_to - c_from)}).
double acceptance_probability(double v, double beta_from, double beta_to, double c_from,
                              double c_to);

/// Same as acceptance_probability but also accepts v = +inf (zero-likelihood
/// states): upward moves are then rejected, downward moves accepted.
double tempering_acceptance(double v, double beta_from, double beta_to, double c_from,
                            double c_to);

/// log pi_0(x) - beta V(x). At beta = 0 the potential is not evaluated.
double log_tempered_density(PotentialEvaluator& eval, std::span<const double> x, double beta);
double log_tempered_density(const TemperedModel& model, std::span<const double> x, double beta);

/// Level distribution p_i ∝ exp(log_z_i + c_i).
std::vector<double> pseudo_prior(std::span<const double> log_z, std::span<const double> affinities);

}  // namespace nrst
