#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrst/explore.hpp"
#include "nrst/model.hpp"
#include "nrst/rng.hpp"

namespace nrst {

/// Per-level samples of the potential, V_n^(i) for i = 0..N.
struct VDataset {
  std::vector<std::vector<double>> levels;

  std::size_t top_level() const { return levels.size() - 1; }
  /// Every level non-empty and free of NaN / -inf (+inf only if allowed).
  void validate(bool allow_infinite = false) const;
};

/// Non-reversible parallel tempering with one chain per grid point and
/// deterministic even/odd swap rounds. Chain states persist between calls
/// so successive adaptation rounds warm-start from the previous grid.
class NrptSampler {
 public:
  NrptSampler(const TemperedModel& model, std::vector<Point> states,
              const Explorer* explorer = nullptr);

  /// One chain per level, each started from a reference draw.
  static NrptSampler from_reference(const TemperedModel& model, std::size_t n_chains, Rng& rng,
                                    const Explorer* explorer = nullptr);

  /// n_scan scans of (exploration pass, swap round), swap phase starting
  /// even. Records V at every level after each scan.
  VDataset run(const Schedule& schedule, std::size_t n_scan, Rng& rng, unsigned workers = 1);

  /// Resizes to n_chains states; chain j takes the state of the old chain
  /// whose beta is nearest to new_betas[j].
  void remap(std::span<const double> old_betas, std::span<const double> new_betas);

  const std::vector<Point>& states() const { return states_; }
  std::uint64_t potential_evaluations() const { return evaluations_; }
  double swap_acceptance_rate() const;

 private:
  const TemperedModel* model_;
  const Explorer* explorer_;
  SliceExplorer default_explorer_;
  std::vector<Point> states_;
  std::uint64_t evaluations_ = 0;
  std::uint64_t swaps_attempted_ = 0;
  std::uint64_t swaps_accepted_ = 0;
};

VDataset run_nrpt(const TemperedModel& model, const Schedule& schedule, std::size_t n_scan,
                  Rng& rng, unsigned workers = 1);

/// Averaged forward/backward stepping-stone estimates of log Z(beta_i),
/// anchored at log Z(0) = 0.
std::vector<double> stepping_stone_logz(const VDataset& data, std::span<const double> betas);

/// c_i = -log Z(beta_i), shifted so c_0 = 0.
std::vector<double> mean_energy_affinities(std::span<const double> log_z);

/// Trapezoid rule on the per-level lower sample medians of V.
std::vector<double> median_affinities(const VDataset& data, std::span<const double> betas);

/// Monte Carlo tempering rejection estimates per interval i = 1..N
/// (stored at i-1): up = r_{i-1,i}, down = r_{i,i-1}, sym = their mean.
struct Rejections {
  std::vector<double> up;
  std::vector<double> down;
  std::vector<double> sym;
};

Rejections estimate_rejections(const VDataset& data, std::span<const double> betas,
                               std::span<const double> affinities);

enum class Interpolation { monotone_cubic, linear };

/// Tempering barrier Lambda(beta): monotone interpolation of the partial
/// sums of symmetrized rejections.
class BarrierEstimate {
 public:
  BarrierEstimate() = default;
  BarrierEstimate(std::vector<double> betas, std::vector<double> values,
                  Interpolation kind = Interpolation::monotone_cubic);

  double operator()(double beta) const;
  double total() const { return values_.empty() ? 0.0 : values_.back(); }

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& values() const { return values_; }
  Interpolation interpolation() const { return kind_; }

 private:
  std::vector<double> betas_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  Interpolation kind_ = Interpolation::monotone_cubic;
};

/// Knots (beta_i, sum_{j<=i} r_j). Fewer than three knots fall back to
/// linear interpolation.
BarrierEstimate build_barrier(std::span<const double> r_sym, std::span<const double> betas,
                              Interpolation kind = Interpolation::monotone_cubic);

/// Equi-rejection grid: beta_i solves Lambda(beta) = (i/N) Lambda by
/// bisection. A zero barrier yields the uniform grid.
std::vector<double> optimize_grid(const BarrierEstimate& barrier, std::size_t n_levels);

/// Unrounded minimizer of expected tour length over tour effectiveness.
double optimal_grid_size_unrounded(double lambda_total);

/// max(2, ceil(gamma * N*)).
std::size_t optimal_grid_size(double lambda_total, double gamma);

struct ConvergenceThresholds {
  double rejection_spread = 0.1;       // std/mean of r_i
  double affinity_change = 0.005;      // relative change in c(1)
  double barrier_change = 0.01;        // relative change in Lambda
  double direction_asymmetry = 0.05;   // mean |r_{i,i-1} - r_{i-1,i}| / mean r

  void validate() const;
};

enum class AffinityMode { mean_energy, median };

const char* to_string(AffinityMode m);
AffinityMode parse_affinity_mode(const std::string& s);

/// Quantities compared between consecutive adaptation rounds.
struct AdaptSnapshot {
  std::vector<double> affinities;
  double barrier_total = 0.0;
  Rejections rejections;
};

struct ConvergenceReport {
  bool converged = false;
  double rejection_spread = 0.0;
  double affinity_change = 0.0;
  double barrier_change = 0.0;
  double direction_asymmetry = 0.0;
};

/// Never converges without a previous snapshot. The asymmetry indicator is
/// reported in both modes but only enforced in mean-energy mode.
ConvergenceReport check_convergence(const std::optional<AdaptSnapshot>& previous,
                                    const AdaptSnapshot& current,
                                    const ConvergenceThresholds& thresholds, AffinityMode mode);

/// Per-level estimate of the local rejection rate 0.5 E|V - c'(beta)|, with
/// c' from finite differences of the affinities.
std::vector<double> local_rejection_rates(const VDataset& data, std::span<const double> betas,
                                          std::span<const double> affinities);

struct AdaptOptions {
  std::size_t initial_levels = 10;
  int max_rounds = 12;
  AffinityMode mode = AffinityMode::mean_energy;
  ConvergenceThresholds thresholds;
  double gamma = 2.0;
  double kappa_bar = 0.95;
  bool tune_explore_steps = true;
  bool allow_restart = true;
  double restart_tolerance = 0.25;
  std::size_t max_explore_chain_len = 8192;
  unsigned workers = 1;
  const Explorer* explorer = nullptr;
};

struct AdaptRound {
  int round = 0;
  std::size_t n_levels = 0;
  std::size_t n_scan = 0;
  double lambda_hat = 0.0;
  double affinity_top = 0.0;
  ConvergenceReport indicators;
};

struct AdaptResult {
  Schedule schedule;
  BarrierEstimate barrier;
  Rejections rejections;
  std::vector<double> log_z;           // stepping-stone estimates on the final grid
  std::vector<AdaptRound> rounds;
  bool converged = false;
  bool restarted = false;
  std::size_t n_scan = 0;
  std::vector<Point> final_states;
  std::uint64_t potential_evaluations = 0;
};

/// Full tuning pipeline: grid, affinities, grid size, and exploration steps.
AdaptResult adapt(const TemperedModel& model, const AdaptOptions& options, Rng& rng);

}  // namespace nrst
