#include "nrst/st_kernels.hpp"

#include <chrono>
#include <string>

#include "nrst/errors.hpp"

namespace nrst {

const char* to_string(Variant v) { return v == Variant::nrst ? "nrst" : "st"; }

Variant parse_variant(const std::string& s) {
  if (s == "nrst") return Variant::nrst;
  if (s == "st") return Variant::st;
  throw InvalidArgument("unknown variant '" + s + "' (expected nrst or st)");
}

namespace {

bool decide(double prob, const StepOptions& options, Rng& rng) {
  switch (options.force) {
    case ForcedMove::accept:
      return true;
    case ForcedMove::reject:
      return false;
    case ForcedMove::none:
      break;
  }
  return rng.uniform() < prob;
}

void explore_level(ChainState& state, const Schedule& schedule, const Explorer& explorer,
                   PotentialEvaluator& eval, Rng& rng) {
  if (state.level > 0) {
    const auto i = static_cast<std::size_t>(state.level);
    state.v = explorer.explore(state.x, state.v, schedule.betas[i], schedule.explore_steps[i - 1],
                               eval, rng);
  } else {
    state.x = eval.model().sample_reference(rng);
    state.v = eval(state.x);
  }
}

double move_acceptance(const ChainState& state, int target, const Schedule& schedule) {
  const auto from = static_cast<std::size_t>(state.level);
  const auto to = static_cast<std::size_t>(target);
  return tempering_acceptance(state.v, schedule.betas[from], schedule.betas[to],
                              schedule.affinities[from], schedule.affinities[to]);
}

void check_state(const ChainState& state, const Schedule& schedule) {
  const int n = static_cast<int>(schedule.top_level());
  if (state.level < 0 || state.level > n) throw InvalidArgument("chain level out of range");
  if (state.direction != 1 && state.direction != -1) {
    throw InvalidArgument("chain direction must be +1 or -1");
  }
}

}  // namespace

ChainState nrst_step(ChainState state, const Schedule& schedule, const Explorer& explorer,
                     PotentialEvaluator& eval, Rng& rng, const StepOptions& options) {
  check_state(state, schedule);
  const int n = static_cast<int>(schedule.top_level());
  const int proposal = state.level + state.direction;
  if (proposal == n + 1) {
    state.level = n;
    state.direction = -1;
  } else if (proposal == -1) {
    state.level = 0;
    state.direction = +1;
  } else if (decide(move_acceptance(state, proposal, schedule), options, rng)) {
    state.level = proposal;
  } else {
    state.direction = -state.direction;
  }
  explore_level(state, schedule, explorer, eval, rng);
  return state;
}

ChainState st_step(ChainState state, const Schedule& schedule, const Explorer& explorer,
                   PotentialEvaluator& eval, Rng& rng, const StepOptions& options) {
  check_state(state, schedule);
  const int n = static_cast<int>(schedule.top_level());
  int direction = options.forced_proposal;
  if (direction == 0) direction = rng.uniform() < 0.5 ? +1 : -1;
  const int proposal = state.level + direction;
  state.direction = direction;
  if (proposal >= 0 && proposal <= n &&
      decide(move_acceptance(state, proposal, schedule), options, rng)) {
    state.level = proposal;
  }
  explore_level(state, schedule, explorer, eval, rng);
  return state;
}

TourOverrun::TourOverrun(TourTrace partial)
    : std::runtime_error("tour did not regenerate within " +
                         std::to_string(partial.kernel_steps()) + " steps"),
      partial_(std::move(partial)) {}

TourTrace run_tour(const TemperedModel& model, const Schedule& schedule, const Explorer& explorer,
                   Rng& rng, const TourOptions& options) {
  schedule.validate();
  if (options.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const int n = static_cast<int>(schedule.top_level());

  PotentialEvaluator eval(model);
  TourTrace trace;
  auto record = [&](const ChainState& s) {
    StepRecord rec{s.level, s.direction, s.v, {}};
    if (s.level == n) {
      ++trace.visits_top;
      if (options.test_functions != nullptr) {
        rec.h.reserve(options.test_functions->size());
        for (const auto& tf : *options.test_functions) rec.h.push_back(tf.fn(s.x));
      }
    }
    trace.steps.push_back(std::move(rec));
  };
  auto finish = [&] {
    trace.v_evals = eval.count();
    trace.cpu_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  ChainState state;
  state.x = model.sample_reference(rng);
  state.v = eval(state.x);
  state.level = 0;
  state.direction = +1;
  record(state);

  const bool nrst = options.variant == Variant::nrst;
  while (true) {
    if (trace.kernel_steps() >= options.max_steps) {
      finish();
      throw TourOverrun(std::move(trace));
    }
    state = nrst ? nrst_step(std::move(state), schedule, explorer, eval, rng, options.step)
                 : st_step(std::move(state), schedule, explorer, eval, rng, options.step);
    record(state);
    if (nrst ? state.in_nrst_atom() : state.level == 0) break;
  }
  finish();
  return trace;
}

void IdealIndexChain::validate() const {
  if (rej_up.empty()) throw InvalidArgument("index chain needs N >= 1");
  if (rej_up.size() != rej_down.size()) {
    throw InvalidArgument("rej_up and rej_down must have equal length");
  }
  for (const auto* v : {&rej_up, &rej_down}) {
    for (double r : *v) {
      if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("rejection probabilities must lie in [0,1)");
    }
  }
}

std::vector<double> IdealIndexChain::symmetrized() const {
  std::vector<double> rho(rej_up.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 0.5 * (rej_up[i] + rej_down[i]);
  return rho;
}

IdealIndexChain IdealIndexChain::symmetric(std::vector<double> rho) {
  IdealIndexChain chain{rho, rho};
  return chain;
}

IdealIndexChain IdealIndexChain::equi_rejection(std::size_t n_levels, double rho) {
  return symmetric(std::vector<double>(n_levels, rho));
}

double ideal_te(const IdealIndexChain& chain, Variant variant) {
  chain.validate();
  double odds = 0.0;
  for (double rho : chain.symmetrized()) odds += rho / (1.0 - rho);
  const auto n = static_cast<double>(chain.top_level());
  if (variant == Variant::nrst) return 1.0 / (1.0 + 2.0 * odds);
  return 1.0 / (4.0 * n - 1.0 + 4.0 * odds);
}

std::vector<double> TransitionMatrix::left_multiply(const std::vector<double>& row) const {
  std::vector<double> out(size, 0.0);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) out[c] += row[r] * (*this)(r, c);
  }
  return out;
}

namespace {

/// rho_{i,i+eps}, with moves off the grid always rejected.
double rejection(const IdealIndexChain& chain, int level, int direction) {
  const int n = static_cast<int>(chain.top_level());
  const int target = level + direction;
  if (target < 0 || target > n) return 1.0;
  return direction > 0 ? chain.rej_up[static_cast<std::size_t>(level)]
                       : chain.rej_down[static_cast<std::size_t>(level - 1)];
}

}  // namespace

TransitionMatrix index_kernel(const IdealIndexChain& chain, Variant variant) {
  chain.validate();
  const int n = static_cast<int>(chain.top_level());
  TransitionMatrix k;
  k.size = 2 * static_cast<std::size_t>(n + 1);
  k.data.assign(k.size * k.size, 0.0);
  for (int i = 0; i <= n; ++i) {
    for (int eps : {+1, -1}) {
      const std::size_t row = TransitionMatrix::index(i, eps);
      if (variant == Variant::nrst) {
        const double rho = rejection(chain, i, eps);
        if (rho < 1.0) k(row, TransitionMatrix::index(i + eps, eps)) += 1.0 - rho;
        k(row, TransitionMatrix::index(i, -eps)) += rho;
      } else {
        for (int proposal : {+1, -1}) {
          const double rho = rejection(chain, i, proposal);
          if (rho < 1.0) k(row, TransitionMatrix::index(i + proposal, proposal)) += 0.5 * (1.0 - rho);
          k(row, TransitionMatrix::index(i, proposal)) += 0.5 * rho;
        }
      }
    }
  }
  return k;
}

std::vector<IndexTour> simulate_index_tours(const IdealIndexChain& chain, Variant variant,
                                            std::uint64_t n_tours, Rng& rng) {
  chain.validate();
  if (n_tours < 1) throw InvalidArgument("n_tours must be >= 1");
  const int n = static_cast<int>(chain.top_level());
  std::vector<IndexTour> tours(n_tours);

  for (auto& tour : tours) {
    int level = 0;
    int direction = +1;
    std::uint64_t tau = 1;
    std::uint64_t top = 0;
    while (true) {
      if (variant == Variant::st) direction = rng.uniform() < 0.5 ? +1 : -1;
      const double rho = rejection(chain, level, direction);
      const bool accepted = rho < 1.0 && rng.uniform() >= rho;
      if (accepted) {
        level += direction;
      } else if (variant == Variant::nrst) {
        direction = -direction;
      }
      ++tau;
      if (level == n) ++top;
      if (level == 0 && (variant == Variant::st || direction == -1)) break;
    }
    tour.tau = tau;
    tour.visits_top = top;
  }
  return tours;
}

}  // namespace nrst
