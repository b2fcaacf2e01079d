#include "nrst/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "nrst/errors.hpp"
#include "nrst/parallel.hpp"

namespace nrst {

double percentile(std::span<const double> xs, double q) {
  if (xs.empty()) throw InsufficientData("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0,1]");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

WeibullFit fit_weibull(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientData("Weibull fit needs at least one sample");
  for (double x : xs) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("Weibull samples must be positive");
  }
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  if (*mn == *mx) return {1.0, mean};

  // Work with x / max to keep x^k bounded.
  const double m = *mx;
  std::vector<double> lx(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) lx[i] = std::log(xs[i] / m);
  const double mean_lx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  double var_lx = 0.0;
  for (double l : lx) var_lx += (l - mean_lx) * (l - mean_lx);
  var_lx /= n;

  auto moments = [&](double k, double& s0, double& s1, double& s2) {
    s0 = s1 = s2 = 0.0;
    for (double l : lx) {
      const double w = std::exp(k * l);
      s0 += w;
      s1 += w * l;
      s2 += w * l * l;
    }
  };

  double k = 1.2825 / std::sqrt(var_lx);
  for (int iter = 0; iter < 200; ++iter) {
    double s0, s1, s2;
    moments(k, s0, s1, s2);
    const double g = s1 / s0 - 1.0 / k - mean_lx;
    const double dg = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
    double next = k - g / dg;
    if (!(next > 0.0)) next = 0.5 * k;
    const double step = std::abs(next - k);
    k = next;
    if (step < 1e-8) break;
  }
  double s0, s1, s2;
  moments(k, s0, s1, s2);
  return {k, m * std::pow(s0 / n, 1.0 / k)};
}

void CpuTimeModel::validate() const {
  if (!(threshold > 0.0)) throw InvalidArgument("CPU model threshold must be positive");
  if (bulk.empty()) throw InvalidArgument("CPU model bulk is empty");
  if (!(tail_shape > 0.0) || !(tail_scale > 0.0)) {
    throw InvalidArgument("CPU model tail parameters must be positive");
  }
  if (!(tail_prob >= 0.0 && tail_prob < 1.0)) throw InvalidArgument("tail_prob must lie in [0,1)");
}

double CpuTimeModel::sample(Rng& rng) const {
  if (rng.uniform() < tail_prob) {
    return threshold + tail_scale * std::pow(rng.exponential(), 1.0 / tail_shape);
  }
  return bulk[rng.index(bulk.size())];
}

std::vector<double> CpuTimeModel::sample(std::size_t n, Rng& rng) const {
  std::vector<double> out(n);
  for (auto& t : out) t = sample(rng);
  return out;
}

CpuTimeModel fit_cpu_model(std::span<const double> times) {
  if (times.size() < 10) throw InsufficientData("CPU model needs at least 10 samples");
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("CPU times must be positive");
  }
  CpuTimeModel model;
  model.threshold = percentile(times, 0.8);
  std::vector<double> exceed;
  for (double t : times) {
    if (t <= model.threshold) {
      model.bulk.push_back(t);
    } else {
      exceed.push_back(t - model.threshold);
    }
  }
  std::sort(model.bulk.begin(), model.bulk.end());
  if (exceed.empty()) {
    model.tail_shape = 1.0;
    model.tail_scale = 1e-6 * model.threshold;
  } else {
    const auto fit = fit_weibull(exceed);
    model.tail_shape = fit.shape;
    model.tail_scale = fit.scale;
  }
  model.validate();
  return model;
}

PoolSimulation simulate_pool(std::span<const double> times, std::size_t pool_size,
                             bool longest_first) {
  if (times.empty()) throw InvalidArgument("need at least one tour");
  if (pool_size < 1) throw InvalidArgument("pool size must be >= 1");
  for (double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("tour times must be >= 0");
  }

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  if (longest_first) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
  }

  using Slot = std::pair<double, std::size_t>;  // (free at, worker)
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free;
  for (std::size_t w = 0; w < pool_size; ++w) free.emplace(0.0, w);

  PoolSimulation sim;
  sim.assignment.assign(times.size(), 0);
  sim.finish_times.assign(pool_size, 0.0);
  std::vector<std::pair<double, int>> events;
  events.reserve(2 * times.size());
  for (std::size_t k : order) {
    auto [at, w] = free.top();
    free.pop();
    const double done = at + times[k];
    sim.assignment[k] = w;
    sim.finish_times[w] = done;
    events.emplace_back(at, +1);
    events.emplace_back(done, -1);
    free.emplace(done, w);
  }
  sim.makespan = *std::max_element(sim.finish_times.begin(), sim.finish_times.end());

  std::sort(events.begin(), events.end());
  long active = 0;
  for (std::size_t e = 0; e < events.size();) {
    const double t = events[e].first;
    for (; e < events.size() && events[e].first == t; ++e) active += events[e].second;
    if (!sim.busy_curve.empty() && sim.busy_curve.back().active == static_cast<std::size_t>(active)) {
      continue;
    }
    sim.busy_curve.push_back({t, static_cast<std::size_t>(active)});
  }
  return sim;
}

PoolSimulation simulate_pool(const CpuTimeModel& model, std::size_t k_tours,
                             std::size_t pool_size, Rng& rng, bool longest_first) {
  if (k_tours < 1) throw InvalidArgument("need at least one tour");
  model.validate();
  const auto times = model.sample(k_tours, rng);
  return simulate_pool(times, pool_size, longest_first);
}

std::vector<CostPoint> cost_curves(const CpuTimeModel& model, std::size_t k_tours,
                                   std::span<const std::size_t> pool_sizes,
                                   std::size_t replications, std::uint64_t seed,
                                   bool longest_first, unsigned workers) {
  if (k_tours < 1) throw InvalidArgument("need at least one tour");
  if (replications < 1) throw InvalidArgument("need at least one replication");
  if (pool_sizes.empty()) throw InvalidArgument("need at least one pool size");
  model.validate();

  const std::size_t np = pool_sizes.size();
  std::vector<std::vector<double>> makespan(np, std::vector<double>(replications));
  std::vector<double> cloud(replications);
  parallel_for(replications, workers, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    const auto times = model.sample(k_tours, rng);
    cloud[r] = std::accumulate(times.begin(), times.end(), 0.0);
    for (std::size_t p = 0; p < np; ++p) {
      makespan[p][r] = simulate_pool(times, pool_sizes[p], longest_first).makespan;
    }
  });

  auto avg = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<CostPoint> out;
  out.reserve(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto pool = static_cast<double>(pool_sizes[p]);
    std::vector<double> hpc(replications);
    for (std::size_t r = 0; r < replications; ++r) hpc[r] = makespan[p][r] * pool;
    CostPoint c;
    c.pool_size = pool_sizes[p];
    c.makespan_mean = avg(makespan[p]);
    c.makespan_lo = percentile(makespan[p], 0.1);
    c.makespan_hi = percentile(makespan[p], 0.9);
    c.hpc_mean = avg(hpc);
    c.hpc_lo = percentile(hpc, 0.1);
    c.hpc_hi = percentile(hpc, 0.9);
    c.cloud_mean = avg(cloud);
    c.cloud_lo = percentile(cloud, 0.1);
    c.cloud_hi = percentile(cloud, 0.9);
    out.push_back(c);
  }
  return out;
}

double te_infinity(double lambda_hat) {
  if (!(lambda_hat >= 0.0) || !std::isfinite(lambda_hat)) {
    throw InvalidArgument("lambda_hat must be finite and >= 0");
  }
  return 1.0 / (1.0 + 2.0 * lambda_hat);
}

}  // namespace nrst
