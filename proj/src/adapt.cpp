#include "nrst/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nrst/errors.hpp"
#include "nrst/parallel.hpp"

namespace nrst {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

void check_grid(const VDataset& data, std::span<const double> betas) {
  if (betas.size() < 2) throw InvalidArgument("grid needs at least two points");
  if (data.levels.size() != betas.size()) {
    throw InvalidArgument("dataset and grid differ in number of levels");
  }
  for (const auto& lvl : data.levels) {
    if (lvl.empty()) throw InsufficientData("empty level in V dataset");
  }
}

// 0/0 -> 0, x/0 -> inf.
double relative(double num, double den) {
  num = std::abs(num);
  den = std::abs(den);
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

}  // namespace

void VDataset::validate(bool allow_infinite) const {
  if (levels.size() < 2) throw InvalidArgument("V dataset needs at least two levels");
  for (const auto& lvl : levels) {
    if (lvl.empty()) throw InsufficientData("empty level in V dataset");
    for (double v : lvl) {
      if (std::isnan(v) || v == -kInf || (v == kInf && !allow_infinite)) {
        throw InvalidArgument("V dataset holds a non-finite value");
      }
    }
  }
}

NrptSampler::NrptSampler(const TemperedModel& model, std::vector<Point> states,
                         const Explorer* explorer)
    : model_(&model), explorer_(explorer), states_(std::move(states)) {
  if (states_.size() < 2) throw InvalidArgument("NRPT needs at least two chains");
  for (const auto& x : states_) {
    if (x.size() != model.dim()) throw InvalidArgument("chain state has wrong dimension");
  }
}

NrptSampler NrptSampler::from_reference(const TemperedModel& model, std::size_t n_chains,
                                        Rng& rng, const Explorer* explorer) {
  std::vector<Point> states;
  states.reserve(n_chains);
  for (std::size_t i = 0; i < n_chains; ++i) states.push_back(model.sample_reference(rng));
  return NrptSampler(model, std::move(states), explorer);
}

VDataset NrptSampler::run(const Schedule& schedule, std::size_t n_scan, Rng& rng,
                          unsigned workers) {
  schedule.validate();
  if (schedule.betas.size() != states_.size()) {
    throw InvalidArgument("schedule and NRPT chains differ in number of levels");
  }
  if (n_scan == 0) throw InvalidArgument("n_scan must be positive");
  const Explorer& kernel = explorer_ != nullptr ? *explorer_ : default_explorer_;
  const std::size_t n = states_.size();
  const auto& betas = schedule.betas;

  const std::uint64_t base_seed = rng.next();
  std::vector<Rng> chain_rngs;
  chain_rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) chain_rngs.push_back(Rng::stream(base_seed, i));

  std::vector<PotentialEvaluator> evals(n, PotentialEvaluator(*model_));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = evals[i](states_[i]);

  VDataset data;
  data.levels.assign(n, {});
  for (auto& lvl : data.levels) lvl.reserve(n_scan);

  for (std::size_t scan = 0; scan < n_scan; ++scan) {
    parallel_for(n, workers, [&](std::size_t i) {
      if (i == 0) {
        states_[0] = model_->sample_reference(chain_rngs[0]);
        v[0] = evals[0](states_[0]);
      } else {
        v[i] = kernel.explore(states_[i], v[i], betas[i], schedule.explore_steps[i - 1], evals[i],
                              chain_rngs[i]);
      }
    });
    for (std::size_t i = scan % 2; i + 1 < n; i += 2) {
      const double log_acc = (betas[i + 1] - betas[i]) * (v[i + 1] - v[i]);
      ++swaps_attempted_;
      if (std::isnan(log_acc)) continue;
      if (log_acc >= 0.0 || std::log(rng.uniform()) < log_acc) {
        std::swap(states_[i], states_[i + 1]);
        std::swap(v[i], v[i + 1]);
        ++swaps_accepted_;
      }
    }
    for (std::size_t i = 0; i < n; ++i) data.levels[i].push_back(v[i]);
  }
  for (const auto& e : evals) evaluations_ += e.count();
  return data;
}

void NrptSampler::remap(std::span<const double> old_betas, std::span<const double> new_betas) {
  if (old_betas.size() != states_.size()) throw InvalidArgument("old grid does not match chains");
  if (new_betas.size() < 2) throw InvalidArgument("NRPT needs at least two chains");
  std::vector<Point> next;
  next.reserve(new_betas.size());
  for (double b : new_betas) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < old_betas.size(); ++i) {
      if (std::abs(old_betas[i] - b) < std::abs(old_betas[best] - b)) best = i;
    }
    next.push_back(states_[best]);
  }
  states_ = std::move(next);
}

double NrptSampler::swap_acceptance_rate() const {
  if (swaps_attempted_ == 0) return 0.0;
  return static_cast<double>(swaps_accepted_) / static_cast<double>(swaps_attempted_);
}

VDataset run_nrpt(const TemperedModel& model, const Schedule& schedule, std::size_t n_scan,
                  Rng& rng, unsigned workers) {
  auto sampler = NrptSampler::from_reference(model, schedule.betas.size(), rng);
  return sampler.run(schedule, n_scan, rng, workers);
}

std::vector<double> stepping_stone_logz(const VDataset& data, std::span<const double> betas) {
  check_grid(data, betas);
  const std::size_t n = betas.size();
  std::vector<double> log_z(n, 0.0);
  std::vector<double> buf;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = betas[i] - betas[i - 1];
    const auto& lo = data.levels[i - 1];
    const auto& hi = data.levels[i];

    buf.resize(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) buf[k] = -d * lo[k];
    const double fwd = log_sum_exp(buf) - std::log(static_cast<double>(lo.size()));

    buf.resize(hi.size());
    for (std::size_t k = 0; k < hi.size(); ++k) buf[k] = d * hi[k];
    const double bwd = std::log(static_cast<double>(hi.size())) - log_sum_exp(buf);

    log_z[i] = log_z[i - 1] + 0.5 * (fwd + bwd);
    if (!std::isfinite(log_z[i])) throw NumericalFailure("stepping stone estimate is not finite");
  }
  return log_z;
}

std::vector<double> mean_energy_affinities(std::span<const double> log_z) {
  if (log_z.empty()) throw InvalidArgument("empty log Z sequence");
  std::vector<double> c(log_z.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = log_z[0] - log_z[i];
  return c;
}

std::vector<double> median_affinities(const VDataset& data, std::span<const double> betas) {
  check_grid(data, betas);
  const std::size_t n = betas.size();
  std::vector<double> med(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s = data.levels[i];
    const auto mid = s.begin() + static_cast<std::ptrdiff_t>((s.size() - 1) / 2);
    std::nth_element(s.begin(), mid, s.end());
    med[i] = *mid;
  }
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = c[i - 1] + 0.5 * (betas[i] - betas[i - 1]) * (med[i] + med[i - 1]);
    if (!std::isfinite(c[i])) throw NumericalFailure("median affinity is not finite");
  }
  return c;
}

Rejections estimate_rejections(const VDataset& data, std::span<const double> betas,
                               std::span<const double> affinities) {
  check_grid(data, betas);
  if (affinities.size() != betas.size()) {
    throw InvalidArgument("affinities and grid differ in length");
  }
  const std::size_t n = betas.size() - 1;
  Rejections r;
  r.up.resize(n);
  r.down.resize(n);
  r.sym.resize(n);
  for (std::size_t i = 1; i <= n; ++i) {
    double acc_up = 0.0;
    for (double v : data.levels[i - 1]) {
      acc_up += tempering_acceptance(v, betas[i - 1], betas[i], affinities[i - 1], affinities[i]);
    }
    double acc_down = 0.0;
    for (double v : data.levels[i]) {
      acc_down += tempering_acceptance(v, betas[i], betas[i - 1], affinities[i], affinities[i - 1]);
    }
    r.up[i - 1] =
        std::clamp(1.0 - acc_up / static_cast<double>(data.levels[i - 1].size()), 0.0, 1.0);
    r.down[i - 1] =
        std::clamp(1.0 - acc_down / static_cast<double>(data.levels[i].size()), 0.0, 1.0);
    r.sym[i - 1] = 0.5 * (r.up[i - 1] + r.down[i - 1]);
  }
  return r;
}

BarrierEstimate::BarrierEstimate(std::vector<double> betas, std::vector<double> values,
                                 Interpolation kind)
    : betas_(std::move(betas)), values_(std::move(values)), kind_(kind) {
  const std::size_t n = betas_.size();
  if (n < 2 || values_.size() != n) throw InvalidArgument("barrier needs matching knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(betas_[i] > betas_[i - 1])) throw InvalidArgument("barrier knots must increase");
    if (values_[i] < values_[i - 1]) throw InvalidArgument("barrier values must not decrease");
  }
  if (n < 3) kind_ = Interpolation::linear;
  if (kind_ == Interpolation::linear) return;

  // Fritsch-Carlson tangents.
  std::vector<double> secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    secant[k] = (values_[k + 1] - values_[k]) / (betas_[k + 1] - betas_[k]);
  }
  slopes_.resize(n);
  slopes_[0] = secant[0];
  slopes_[n - 1] = secant[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    slopes_[k] = secant[k - 1] * secant[k] > 0.0 ? 0.5 * (secant[k - 1] + secant[k]) : 0.0;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (secant[k] == 0.0) {
      slopes_[k] = 0.0;
      slopes_[k + 1] = 0.0;
      continue;
    }
    const double a = slopes_[k] / secant[k];
    const double b = slopes_[k + 1] / secant[k];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      slopes_[k] = t * a * secant[k];
      slopes_[k + 1] = t * b * secant[k];
    }
  }
}

double BarrierEstimate::operator()(double beta) const {
  if (betas_.empty()) return 0.0;
  if (beta <= betas_.front()) return values_.front();
  if (beta >= betas_.back()) return values_.back();
  const auto it = std::upper_bound(betas_.begin(), betas_.end(), beta);
  const std::size_t k = static_cast<std::size_t>(it - betas_.begin()) - 1;
  const double h = betas_[k + 1] - betas_[k];
  const double t = (beta - betas_[k]) / h;
  if (kind_ == Interpolation::linear) {
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[k] + h10 * h * slopes_[k] + h01 * values_[k + 1] + h11 * h * slopes_[k + 1];
}

BarrierEstimate build_barrier(std::span<const double> r_sym, std::span<const double> betas,
                              Interpolation kind) {
  if (betas.size() != r_sym.size() + 1) {
    throw InvalidArgument("need one rejection per grid interval");
  }
  std::vector<double> values(betas.size(), 0.0);
  for (std::size_t i = 0; i < r_sym.size(); ++i) {
    if (!(r_sym[i] >= 0.0 && r_sym[i] <= 1.0)) {
      throw InvalidArgument("rejection probabilities must lie in [0,1]");
    }
    values[i + 1] = values[i] + r_sym[i];
  }
  return BarrierEstimate(std::vector<double>(betas.begin(), betas.end()), std::move(values), kind);
}

std::vector<double> optimize_grid(const BarrierEstimate& barrier, std::size_t n_levels) {
  if (n_levels < 1) throw InvalidArgument("grid needs N >= 1");
  const double total = barrier.total();
  if (!(total > 0.0)) return Schedule::uniform(n_levels).betas;

  std::vector<double> betas(n_levels + 1);
  betas[0] = 0.0;
  betas[n_levels] = 1.0;
  for (std::size_t i = 1; i < n_levels; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n_levels);
    double lo = betas[i - 1];
    double hi = 1.0;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (barrier(mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double b = 0.5 * (lo + hi);
    if (!(b > betas[i - 1])) b = std::nextafter(betas[i - 1], 1.0);
    betas[i] = b;
  }
  for (std::size_t i = n_levels - 1; i >= 1 && !(betas[i] < betas[i + 1]); --i) {
    betas[i] = std::nextafter(betas[i + 1], 0.0);
  }
  return betas;
}

double optimal_grid_size_unrounded(double lambda_total) {
  if (!(lambda_total > 0.0) || !std::isfinite(lambda_total)) {
    throw InvalidArgument("barrier must be positive and finite");
  }
  const double l = lambda_total;
  return l * (1.0 + std::sqrt(1.0 + 1.0 / (1.0 + 2.0 * l)));
}

std::size_t optimal_grid_size(double lambda_total, double gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be >= 1");
  const double n = std::ceil(gamma * optimal_grid_size_unrounded(lambda_total));
  return std::max<std::size_t>(2, static_cast<std::size_t>(n));
}

void ConvergenceThresholds::validate() const {
  for (double t : {rejection_spread, affinity_change, barrier_change, direction_asymmetry}) {
    if (!(t > 0.0)) throw InvalidArgument("convergence thresholds must be positive");
  }
}

const char* to_string(AffinityMode m) {
  return m == AffinityMode::mean_energy ? "mean" : "median";
}

AffinityMode parse_affinity_mode(const std::string& s) {
  if (s == "mean" || s == "mean_energy") return AffinityMode::mean_energy;
  if (s == "median") return AffinityMode::median;
  throw InvalidArgument("unknown affinity mode '" + s + "' (expected mean or median)");
}

ConvergenceReport check_convergence(const std::optional<AdaptSnapshot>& previous,
                                    const AdaptSnapshot& current,
                                    const ConvergenceThresholds& thresholds, AffinityMode mode) {
  ConvergenceReport rep;
  const auto& sym = current.rejections.sym;
  if (!sym.empty()) {
    const double m = mean(sym);
    double var = 0.0;
    for (double r : sym) var += (r - m) * (r - m);
    var /= static_cast<double>(sym.size());
    rep.rejection_spread = relative(std::sqrt(var), m);

    double asym = 0.0;
    for (std::size_t i = 0; i < sym.size(); ++i) {
      asym += std::abs(current.rejections.down[i] - current.rejections.up[i]);
    }
    rep.direction_asymmetry = relative(asym / static_cast<double>(sym.size()), m);
  }
  if (!previous) {
    rep.affinity_change = kInf;
    rep.barrier_change = kInf;
    rep.converged = false;
    return rep;
  }
  const double c_new = current.affinities.empty() ? 0.0 : current.affinities.back();
  const double c_old = previous->affinities.empty() ? 0.0 : previous->affinities.back();
  rep.affinity_change = relative(c_new - c_old, c_old);
  rep.barrier_change = relative(current.barrier_total - previous->barrier_total,
                                previous->barrier_total);
  rep.converged = rep.rejection_spread < thresholds.rejection_spread &&
                  rep.affinity_change < thresholds.affinity_change &&
                  rep.barrier_change < thresholds.barrier_change;
  if (mode == AffinityMode::mean_energy) {
    rep.converged = rep.converged && rep.direction_asymmetry < thresholds.direction_asymmetry;
  }
  return rep;
}

std::vector<double> local_rejection_rates(const VDataset& data, std::span<const double> betas,
                                          std::span<const double> affinities) {
  check_grid(data, betas);
  if (affinities.size() != betas.size()) {
    throw InvalidArgument("affinities and grid differ in length");
  }
  const std::size_t n = betas.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    const double slope = (affinities[b] - affinities[a]) / (betas[b] - betas[a]);
    double s = 0.0;
    for (double v : data.levels[i]) s += 0.5 * std::abs(v - slope);
    out[i] = s / static_cast<double>(data.levels[i].size());
  }
  return out;
}

namespace {

struct LoopOutcome {
  Schedule schedule;
  VDataset data;
  std::vector<double> log_z;
  Rejections rejections;
  BarrierEstimate barrier;
  bool converged = false;
  std::size_t n_scan = 0;
};

std::vector<double> compute_affinities(const VDataset& data, std::span<const double> betas,
                                       AffinityMode mode, std::vector<double>& log_z) {
  log_z = stepping_stone_logz(data, betas);
  if (mode == AffinityMode::median) return median_affinities(data, betas);
  return mean_energy_affinities(log_z);
}

LoopOutcome adaptation_loop(NrptSampler& sampler, std::vector<double> initial_betas,
                            const AdaptOptions& opt, Rng& rng, std::vector<AdaptRound>& log) {
  const std::size_t n_levels = initial_betas.size() - 1;
  LoopOutcome out;
  out.schedule = Schedule::uniform(n_levels);
  out.schedule.betas = std::move(initial_betas);
  std::optional<AdaptSnapshot> previous;
  std::size_t n_scan = 1;

  for (int round = 1; round <= opt.max_rounds; ++round) {
    n_scan *= 2;
    const VDataset data = sampler.run(out.schedule, n_scan, rng, opt.workers);
    std::vector<double> log_z;
    const auto& betas = out.schedule.betas;
    auto affinities = compute_affinities(data, betas, opt.mode, log_z);
    auto rej = estimate_rejections(data, betas, affinities);
    const auto barrier = build_barrier(rej.sym, betas);

    AdaptSnapshot snap{affinities, barrier.total(), rej};
    const auto report = check_convergence(previous, snap, opt.thresholds, opt.mode);
    log.push_back({round, n_levels, n_scan, barrier.total(), affinities.back(), report});

    const auto new_betas = optimize_grid(barrier, n_levels);
    sampler.remap(betas, new_betas);
    out.schedule.betas = new_betas;
    previous = std::move(snap);
    if (report.converged) {
      out.converged = true;
      break;
    }
  }

  out.data = sampler.run(out.schedule, n_scan, rng, opt.workers);
  const auto& betas = out.schedule.betas;
  out.schedule.affinities = compute_affinities(out.data, betas, opt.mode, out.log_z);
  out.rejections = estimate_rejections(out.data, betas, out.schedule.affinities);
  out.barrier = build_barrier(out.rejections.sym, betas);
  out.n_scan = n_scan;
  return out;
}

}  // namespace

AdaptResult adapt(const TemperedModel& model, const AdaptOptions& options, Rng& rng) {
  if (options.initial_levels < 1) throw InvalidArgument("initial_levels must be >= 1");
  if (options.max_rounds < 1) throw InvalidArgument("max_rounds must be >= 1");
  if (!(options.kappa_bar > 0.0 && options.kappa_bar < 1.0)) {
    throw InvalidArgument("kappa_bar must lie in (0,1)");
  }
  if (!(options.gamma >= 1.0)) throw InvalidArgument("gamma must be >= 1");
  options.thresholds.validate();

  AdaptResult result;
  std::size_t n_levels = options.initial_levels;
  auto sampler =
      NrptSampler::from_reference(model, n_levels + 1, rng, options.explorer);
  LoopOutcome loop =
      adaptation_loop(sampler, Schedule::uniform(n_levels).betas, options, rng, result.rounds);

  const double lambda = loop.barrier.total();
  if (options.allow_restart && lambda > 0.0) {
    const std::size_t n_opt = optimal_grid_size(lambda, options.gamma);
    const double mismatch = std::abs(static_cast<double>(n_opt) - static_cast<double>(n_levels)) /
                            static_cast<double>(n_levels);
    if (mismatch > options.restart_tolerance) {
      auto target = optimize_grid(loop.barrier, n_opt);
      sampler.remap(loop.schedule.betas, target);
      n_levels = n_opt;
      result.restarted = true;
      loop = adaptation_loop(sampler, std::move(target), options, rng, result.rounds);
    }
  }

  result.schedule = loop.schedule;
  result.barrier = loop.barrier;
  result.rejections = loop.rejections;
  result.log_z = loop.log_z;
  result.converged = loop.converged;
  result.n_scan = loop.n_scan;
  result.final_states = sampler.states();

  if (options.tune_explore_steps) {
    ExploreTuningOptions t;
    t.kappa_bar = options.kappa_bar;
    t.chain_len = std::clamp<std::size_t>(32 * loop.n_scan, 256, options.max_explore_chain_len);
    t.workers = options.workers;
    result.schedule.explore_steps = tune_explore_steps(model, result.schedule, t, rng,
                                                       result.final_states, options.explorer);
  }
  result.potential_evaluations = sampler.potential_evaluations();
  result.schedule.validate();
  return result;
}

}  // namespace nrst
