#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <span>
#include <vector>

#include "nrst/errors.hpp"
#include "nrst/model.hpp"
#include "nrst/rng.hpp"

namespace nrst {

/// Slice sampler settings (doubling procedure with shrinkage).
struct SliceConfig {
  double initial_width = 1.0;
  int max_doublings = 20;

  void validate() const;
};

/// Smallest bracket width tolerated during shrinkage before giving up.
inline constexpr double kMinSliceWidth = 1e-300;

namespace detail {

template <class T>
double log_density_of(const T& value) {
  if constexpr (std::is_arithmetic_v<T>) {
    return static_cast<double>(value);
  } else {
    return value.log_density;
  }
}

/// One univariate slice update of coordinate j. f evaluates the full vector
/// and returns either a log density or a struct with a `log_density` member
/// (plus any side values the caller wants back for the accepted point).
/// x[j] is modified in place; returns f at the new point.
template <class F, class R = std::invoke_result_t<F&, std::span<const double>>>
R slice_coordinate(std::span<double> x, std::size_t j, double log_fx, F&& f,
                   const SliceConfig& cfg, Rng& rng) {
  const double x0 = x[j];
  const double level = log_fx - rng.exponential();
  const double w = cfg.initial_width;

  auto eval_at = [&](double value) {
    x[j] = value;
    R out = f(std::span<const double>(x.data(), x.size()));
    x[j] = x0;
    return out;
  };
  auto lp_at = [&](double value) { return log_density_of(eval_at(value)); };

  double left = x0 - w * rng.uniform();
  double right = left + w;
  double f_left = lp_at(left);
  double f_right = lp_at(right);
  for (int k = cfg.max_doublings; k > 0 && (level < f_left || level < f_right); --k) {
    if (rng.uniform() < 0.5) {
      left -= right - left;
      f_left = lp_at(left);
    } else {
      right += right - left;
      f_right = lp_at(right);
    }
  }

  // Doubling acceptance test: x1 is rejected if the doubling procedure
  // started from x1 could not have produced the bracket [left, right].
  auto acceptable = [&](double x1) {
    double lh = left;
    double rh = right;
    bool differ = false;
    while (rh - lh > 1.1 * w) {
      const double mid = 0.5 * (lh + rh);
      if ((x0 < mid && x1 >= mid) || (x0 >= mid && x1 < mid)) differ = true;
      if (x1 < mid) {
        rh = mid;
      } else {
        lh = mid;
      }
      if (differ && level >= lp_at(lh) && level >= lp_at(rh)) return false;
    }
    return true;
  };

  double lo = left;
  double hi = right;
  while (true) {
    const double x1 = lo + rng.uniform() * (hi - lo);
    R f1 = eval_at(x1);
    if (level < log_density_of(f1) && acceptable(x1)) {
      x[j] = x1;
      return f1;
    }
    if (x1 < x0) {
      lo = x1;
    } else {
      hi = x1;
    }
    if (hi - lo < kMinSliceWidth) {
      throw NumericalFailure("slice sampler: shrinkage bracket collapsed");
    }
  }
}

}  // namespace detail

/// One slice-within-Gibbs sweep over coordinates 0..dim-1, in place.
/// `current` must equal f(x); returns f at the updated point.
template <class F, class R = std::invoke_result_t<F&, std::span<const double>>>
R slice_sweep(std::span<double> x, R current, F&& f, const SliceConfig& cfg, Rng& rng) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    current = detail::slice_coordinate(x, j, detail::log_density_of(current), f, cfg, rng);
  }
  return current;
}

using LogDensity = std::function<double(std::span<const double>)>;

/// One sweep of the slice sampler targeting exp(log_density).
Point slice_step(Point x, const LogDensity& log_density, const SliceConfig& cfg, Rng& rng);

/// Markov kernel acting in place on a point.
using Kernel = std::function<void(Point&, Rng&)>;

/// k applied n times in succession.
Kernel compose(Kernel k, int n);

/// Exploration kernel family {K_i}. Implementations move x with a
/// pi_beta-invariant kernel and return V at the new point.
class Explorer {
 public:
  virtual ~Explorer() = default;

  /// Applies the level kernel `steps` times. `v` is V(x) on entry.
  virtual double explore(Point& x, double v, double beta, int steps,
                         PotentialEvaluator& eval, Rng& rng) const = 0;
};

/// Slice sampling within Gibbs on the tempered density.
class SliceExplorer final : public Explorer {
 public:
  explicit SliceExplorer(SliceConfig cfg = {});

  double explore(Point& x, double v, double beta, int steps, PotentialEvaluator& eval,
                 Rng& rng) const override;

  const SliceConfig& config() const { return cfg_; }

 private:
  SliceConfig cfg_;
};

/// Upper bound on tuned exploration steps per level.
inline constexpr int kMaxExploreSteps = 64;

/// Biased sample autocorrelation (denominator n) at lags 0..max_lag.
/// Returns an empty vector when the series has zero variance.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

/// Smallest n >= 1 with max(0, acf(n)) <= kappa_bar, capped at n_max.
/// A zero-variance series yields 1.
int smallest_decorrelating_lag(std::span<const double> series, double kappa_bar, int n_max);

struct ExploreTuningOptions {
  double kappa_bar = 0.95;
  std::size_t chain_len = 1024;
  int n_max = kMaxExploreSteps;
  unsigned workers = 1;
};

/// Autocorrelation-based choice of the exploration step count n_i for each
/// level i = 1..N. Each level runs its own chain of `chain_len` single-step
/// explorations at beta_i, started from initial_states[i] when provided
/// (otherwise from a reference draw), and records the V series.
std::vector<int> tune_explore_steps(const TemperedModel& model, const Schedule& schedule,
                                    const ExploreTuningOptions& options, Rng& rng,
                                    std::span<const Point> initial_states = {},
                                    const Explorer* explorer = nullptr);

}  // namespace nrst
