#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrst/st_kernels.hpp"

namespace nrst {

/// Per-tour summary used by the regenerative estimators.
struct TourRecord {
  std::uint64_t tau = 0;
  std::uint64_t visits_top = 0;        // s_k(1{i=N})
  std::vector<double> top_sums;        // s_k(h * 1{i=N}), one per test function
};

struct TourStatistics {
  std::vector<TourRecord> tours;
  std::size_t num_functions = 0;

  std::size_t size() const { return tours.size(); }
  std::uint64_t total_visits() const;
  std::vector<std::uint64_t> visit_counts() const;
  void validate() const;

  static TourStatistics from_traces(std::span<const TourTrace> traces, std::size_t num_functions);
};

/// Sum_k s_k(h 1{i=N}) / Sum_k s_k(1{i=N}). Throws NoTopVisits if no tour
/// reached the target.
double ratio_estimate(const TourStatistics& stats, std::size_t h_index);

/// k * Sum_k (s_k(h 1{i=N}) - R v_k)^2 / (Sum_k v_k)^2.
double estimate_sigma2(const TourStatistics& stats, std::size_t h_index);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Standard normal quantile (Wichura's AS 241 rational approximation).
double normal_quantile(double p);

/// z_alpha = Phi^{-1}((1 + alpha) / 2).
double z_alpha(double alpha);

/// estimate -+ z_alpha sqrt(sigma2 / k).
Interval confidence_interval(double estimate, double sigma2, std::uint64_t k, double alpha);

/// (Sum v)^2 / (k Sum v^2); zero when no tour visited the top level.
double estimate_te(std::span<const std::uint64_t> visit_counts);

/// ceil((4 / te) (z_alpha / delta)^2): tours needed for a half-width of
/// delta on every |h| <= 1.
std::uint64_t min_tours(double alpha, double delta, double te);

struct FunctionEstimate {
  std::string name;
  double estimate = 0.0;
  double sigma2 = 0.0;
  Interval ci;
};

struct Diagnostics {
  std::uint64_t k = 0;
  double te_hat = 0.0;
  double alpha = 0.95;
  std::vector<FunctionEstimate> functions;
};

Diagnostics summarize(const TourStatistics& stats, std::span<const std::string> names,
                      double alpha);

}  // namespace nrst
