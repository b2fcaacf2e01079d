#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nrst/rng.hpp"

namespace nrst {

/// Sample quantile by linear interpolation between order statistics
/// (position q (n - 1)), q in [0, 1].
double percentile(std::span<const double> xs, double q);

struct WeibullFit {
  double shape = 1.0;
  double scale = 1.0;
};

/// Maximum likelihood Weibull fit (Newton on the shape profile equation).
/// Degenerate input (fewer than two distinct values) falls back to an
/// exponential with the sample mean as scale.
WeibullFit fit_weibull(std::span<const double> xs);

/// Bulk-tail mixture for per-tour CPU times: empirical below the 80th
/// percentile, threshold plus a Weibull exceedance above it.
struct CpuTimeModel {
  double threshold = 0.0;
  std::vector<double> bulk;  // sorted samples <= threshold
  double tail_shape = 1.0;
  double tail_scale = 1.0;
  double tail_prob = 0.2;

  void validate() const;
  double sample(Rng& rng) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;
};

/// Needs at least 10 positive samples.
CpuTimeModel fit_cpu_model(std::span<const double> times);

struct BusyPoint {
  double time = 0.0;
  std::size_t active = 0;  // workers busy on [time, next time)
};

struct PoolSimulation {
  double makespan = 0.0;
  std::vector<BusyPoint> busy_curve;
  std::vector<std::size_t> assignment;  // worker index per tour
  std::vector<double> finish_times;     // per worker
};

/// Greedy list scheduling: tours are taken in order (or longest first) and
/// handed to the earliest-free worker, lowest index on ties.
PoolSimulation simulate_pool(std::span<const double> times, std::size_t pool_size,
                             bool longest_first = false);
PoolSimulation simulate_pool(const CpuTimeModel& model, std::size_t k_tours,
                             std::size_t pool_size, Rng& rng, bool longest_first = false);

struct CostPoint {
  std::size_t pool_size = 0;
  double makespan_mean = 0.0;
  double makespan_lo = 0.0;  // 10% replication quantile
  double makespan_hi = 0.0;  // 90% replication quantile
  double hpc_mean = 0.0;     // makespan * pool_size
  double hpc_lo = 0.0;
  double hpc_hi = 0.0;
  double cloud_mean = 0.0;   // total CPU time
  double cloud_lo = 0.0;
  double cloud_hi = 0.0;
};

/// Each replication samples one set of k_tours times and schedules it on
/// every pool size; replication r uses Rng::stream(seed, r).
std::vector<CostPoint> cost_curves(const CpuTimeModel& model, std::size_t k_tours,
                                   std::span<const std::size_t> pool_sizes,
                                   std::size_t replications, std::uint64_t seed,
                                   bool longest_first = false, unsigned workers = 1);

/// 1 / (1 + 2 lambda).
double te_infinity(double lambda_hat);

}  // namespace nrst
