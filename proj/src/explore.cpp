#include "nrst/explore.hpp"

#include <cmath>
#include <limits>

#include "nrst/parallel.hpp"

namespace nrst {

void SliceConfig::validate() const {
  if (!(initial_width > 0.0) || !std::isfinite(initial_width)) {
    throw InvalidArgument("slice initial_width must be positive");
  }
  if (max_doublings < 1) throw InvalidArgument("slice max_doublings must be >= 1");
}

Point slice_step(Point x, const LogDensity& log_density, const SliceConfig& cfg, Rng& rng) {
  cfg.validate();
  const double lp = log_density(x);
  if (!std::isfinite(lp)) throw InvalidArgument("slice_step: log density not finite at x");
  slice_sweep(std::span<double>(x), lp, log_density, cfg, rng);
  return x;
}

Kernel compose(Kernel k, int n) {
  if (n < 1) throw InvalidArgument("compose: n must be >= 1");
  if (n == 1) return k;
  return [k = std::move(k), n](Point& x, Rng& rng) {
    for (int s = 0; s < n; ++s) k(x, rng);
  };
}

SliceExplorer::SliceExplorer(SliceConfig cfg) : cfg_(cfg) { cfg_.validate(); }

namespace {

struct TemperedValue {
  double log_density;
  double v;
};

}  // namespace

double SliceExplorer::explore(Point& x, double v, double beta, int steps,
                              PotentialEvaluator& eval, Rng& rng) const {
  const TemperedModel& model = eval.model();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto density = [&](std::span<const double> y) -> TemperedValue {
    const double lr = model.log_reference(y);
    if (lr == -kInf) return {-kInf, kInf};
    const double vy = eval(y);
    if (std::isinf(vy)) return {-kInf, vy};
    return {lr - beta * vy, vy};
  };

  TemperedValue current{model.log_reference(x) - beta * v, v};
  // Single-step kernel K_i; the level kernel is its `steps`-fold composition.
  Kernel base = [&](Point& y, Rng& r) {
    current = slice_sweep(std::span<double>(y), current, density, cfg_, r);
  };
  compose(base, steps)(x, rng);
  return current.v;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n == 0) return {};
  double mean = 0.0;
  for (double s : series) mean += s;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double s : series) c0 += (s - mean) * (s - mean);
  if (!(c0 > 0.0) || !std::isfinite(c0)) return {};

  std::vector<double> acf(max_lag + 1, 0.0);
  acf[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag && lag < n; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) c += (series[t] - mean) * (series[t + lag] - mean);
    acf[lag] = c / c0;
  }
  return acf;
}

int smallest_decorrelating_lag(std::span<const double> series, double kappa_bar, int n_max) {
  if (!(kappa_bar > 0.0 && kappa_bar < 1.0)) throw InvalidArgument("kappa_bar must lie in (0,1)");
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  const auto acf = autocorrelation(series, static_cast<std::size_t>(n_max));
  if (acf.empty()) return 1;
  for (int lag = 1; lag <= n_max; ++lag) {
    if (std::max(0.0, acf[static_cast<std::size_t>(lag)]) <= kappa_bar) return lag;
  }
  return n_max;
}

std::vector<int> tune_explore_steps(const TemperedModel& model, const Schedule& schedule,
                                    const ExploreTuningOptions& options, Rng& rng,
                                    std::span<const Point> initial_states,
                                    const Explorer* explorer) {
  schedule.validate();
  if (!(options.kappa_bar > 0.0 && options.kappa_bar < 1.0)) {
    throw InvalidArgument("kappa_bar must lie in (0,1)");
  }
  if (options.chain_len < 2) throw InvalidArgument("chain_len must be >= 2");
  const std::size_t n_levels = schedule.top_level();
  if (!initial_states.empty() && initial_states.size() != n_levels + 1) {
    throw InvalidArgument("initial_states must hold one point per level");
  }

  const SliceExplorer default_explorer;
  const Explorer& kernel = explorer != nullptr ? *explorer : default_explorer;
  const std::uint64_t base_seed = rng.next();
  std::vector<int> steps(n_levels, 1);

  parallel_for(n_levels, options.workers, [&](std::size_t idx) {
    const std::size_t level = idx + 1;
    Rng level_rng = Rng::stream(base_seed, level);
    PotentialEvaluator eval(model);
    const double beta = schedule.betas[level];

    Point x;
    std::size_t burn_in = 0;
    if (!initial_states.empty()) {
      x = initial_states[level];
    } else {
      x = model.sample_reference(level_rng);
      burn_in = options.chain_len / 4;
    }
    double v = eval(x);
    for (std::size_t s = 0; s < burn_in; ++s) v = kernel.explore(x, v, beta, 1, eval, level_rng);

    std::vector<double> trace;
    trace.reserve(options.chain_len);
    for (std::size_t s = 0; s < options.chain_len; ++s) {
      v = kernel.explore(x, v, beta, 1, eval, level_rng);
      trace.push_back(v);
    }
    steps[idx] = smallest_decorrelating_lag(trace, options.kappa_bar, options.n_max);
  });
  return steps;
}

}  // namespace nrst
