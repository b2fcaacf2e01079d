#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrst/explore.hpp"
#include "nrst/model.hpp"
#include "nrst/rng.hpp"

namespace nrst {

enum class Variant { nrst, st };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

/// Lifted state (x, i, eps). `v` caches V(x).
struct ChainState {
  Point x;
  int level = 0;
  int direction = +1;
  double v = 0.0;

  /// NRST regeneration atom: reference level moving down.
  bool in_nrst_atom() const { return level == 0 && direction == -1; }
};

/// Test hooks replacing the random parts of the tempering move.
enum class ForcedMove { none, accept, reject };

struct StepOptions {
  ForcedMove force = ForcedMove::none;
  int forced_proposal = 0;  // ST only: +1 / -1 replaces the fair coin; 0 draws it
};

/// One step of non-reversible simulated tempering: deterministic proposal
/// i + eps with bounces at both ends, accept-or-flip, then exploration
/// (fresh reference draw at level 0, n_i kernel steps otherwise).
ChainState nrst_step(ChainState state, const Schedule& schedule, const Explorer& explorer,
                     PotentialEvaluator& eval, Rng& rng, const StepOptions& options = {});

/// One step of reversible simulated tempering with a symmetric +-1 proposal.
/// Out-of-range proposals are rejected. `direction` records the proposal.
ChainState st_step(ChainState state, const Schedule& schedule, const Explorer& explorer,
                   PotentialEvaluator& eval, Rng& rng, const StepOptions& options = {});

struct StepRecord {
  int level = 0;
  int direction = 0;
  double v = 0.0;
  std::vector<double> h;  // test-function values; filled only at the top level
};

/// One regeneration tour. steps[0] is the state drawn from the regeneration
/// measure and steps.back() the (only) atom visit, so tau() equals the tour
/// length T_k - T_{k-1}.
struct TourTrace {
  std::vector<StepRecord> steps;
  std::uint64_t v_evals = 0;
  double cpu_seconds = 0.0;
  std::uint64_t visits_top = 0;

  std::uint64_t tau() const { return steps.size(); }
  std::uint64_t kernel_steps() const { return steps.empty() ? 0 : steps.size() - 1; }
};

inline constexpr std::uint64_t kDefaultMaxTourSteps = 1'000'000;

struct TourOptions {
  Variant variant = Variant::nrst;
  std::uint64_t max_steps = kDefaultMaxTourSteps;  // kernel steps
  StepOptions step;
  const std::vector<TestFunction>* test_functions = nullptr;
};

class TourOverrun : public std::runtime_error {
 public:
  explicit TourOverrun(TourTrace partial);
  const TourTrace& partial_trace() const { return partial_; }

 private:
  TourTrace partial_;
};

/// Runs a tour from the regeneration measure until the atom is hit
/// (NRST: level 0 moving down; ST: any return to level 0).
TourTrace run_tour(const TemperedModel& model, const Schedule& schedule, const Explorer& explorer,
                   Rng& rng, const TourOptions& options = {});

/// Index process under perfect V mixing: rejection probabilities per move.
struct IdealIndexChain {
  std::vector<double> rej_up;    // rho_{i,i+1}, i = 0..N-1
  std::vector<double> rej_down;  // rho_{i,i-1}, i = 1..N (stored at i-1)

  std::size_t top_level() const { return rej_up.size(); }
  void validate() const;

  /// rho_i = (rho_{i-1,i} + rho_{i,i-1}) / 2 for i = 1..N.
  std::vector<double> symmetrized() const;

  static IdealIndexChain symmetric(std::vector<double> rho);
  static IdealIndexChain equi_rejection(std::size_t n_levels, double rho);
};

/// Closed-form tour effectiveness with uniform levels.
double ideal_te(const IdealIndexChain& chain, Variant variant);

/// Dense row-stochastic transition matrix over lifted index states.
/// State (i, eps) maps to row 2i (eps = +1) or 2i + 1 (eps = -1).
struct TransitionMatrix {
  std::size_t size = 0;
  std::vector<double> data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * size + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * size + c]; }

  static std::size_t index(int level, int direction) {
    return 2 * static_cast<std::size_t>(level) + (direction > 0 ? 0 : 1);
  }

  /// Row vector times matrix.
  std::vector<double> left_multiply(const std::vector<double>& row) const;
};

TransitionMatrix index_kernel(const IdealIndexChain& chain, Variant variant);

struct IndexTour {
  std::uint64_t tau = 0;
  std::uint64_t visits_top = 0;
};

/// Simulates tours of the index chain from (0, +1) to the atom.
std::vector<IndexTour> simulate_index_tours(const IdealIndexChain& chain, Variant variant,
                                            std::uint64_t n_tours, Rng& rng);

}  // namespace nrst
