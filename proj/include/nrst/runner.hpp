#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrst/explore.hpp"
#include "nrst/model.hpp"
#include "nrst/st_kernels.hpp"
#include "nrst/stats.hpp"

namespace nrst {

struct RunOptions {
  Variant variant = Variant::nrst;
  double alpha = 0.95;
  double delta = 0.5;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::uint64_t max_tour_steps = kDefaultMaxTourSteps;
  bool keep_traces = true;
  const Explorer* explorer = nullptr;  // slice sampler when null

  void validate() const;
};

struct TourSummary {
  std::uint64_t index = 0;
  std::uint64_t tau = 0;
  std::uint64_t visits_top = 0;
  std::uint64_t v_evals = 0;
  double cpu_seconds = 0.0;
};

struct RunReport {
  Variant variant = Variant::nrst;
  std::uint64_t seed = 0;
  double alpha = 0.95;
  double delta = 0.5;
  double te_input = 1.0;          // TE used to size the run
  std::uint64_t k_trial = 0;      // pilot_then_run only
  std::uint64_t k_extra = 0;
  std::vector<TourSummary> tours;
  std::vector<TourTrace> traces;  // empty unless keep_traces
  TourStatistics stats;
  Diagnostics diagnostics;        // te_hat and per-function estimates
  std::uint64_t serial_cost = 0;
  std::uint64_t parallel_cost = 0;
  double wall_seconds = 0.0;

  double te_hat() const { return diagnostics.te_hat; }
  std::uint64_t k() const { return tours.size(); }
};

/// A tour exceeded its step budget; the run was abandoned.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(std::uint64_t tour_index, const std::string& what);
  std::uint64_t tour_index() const { return tour_index_; }

 private:
  std::uint64_t tour_index_;
};

/// Runs tours first_index .. first_index + count - 1. Tour k always uses
/// Rng::stream(seed, k), so results do not depend on the worker count.
std::vector<TourTrace> run_tours(const TemperedModel& model, const Schedule& schedule,
                                 const RunOptions& options, std::uint64_t first_index,
                                 std::uint64_t count);

/// K = min_tours(alpha, delta, te_hat) independent tours.
RunReport run_parallel(const TemperedModel& model, const Schedule& schedule, double te_hat,
                       const RunOptions& options);

/// Pilot of K_trial = min_tours(alpha, delta, 1 / (1 + 2 lambda_hat)) tours,
/// then max(0, K - K_trial) more where K comes from the pilot's TE estimate.
RunReport pilot_then_run(const TemperedModel& model, const Schedule& schedule, double lambda_hat,
                         const RunOptions& options);

}  // namespace nrst
