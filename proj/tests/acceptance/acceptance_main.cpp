#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nrst/adapt.hpp"
#include "nrst/bench_models.hpp"
#include "nrst/io.hpp"
#include "nrst/planner.hpp"
#include "nrst/runner.hpp"
#include "nrst/st_kernels.hpp"
#include "nrst/stats.hpp"
#include "support.hpp"

using namespace nrst;

namespace {

constexpr double kM = 2.0;
constexpr double kSigma0 = 2.0;
constexpr std::size_t kToyDim = 3;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

std::vector<std::uint64_t> visit_counts(const std::vector<IndexTour>& tours) {
  std::vector<std::uint64_t> v;
  v.reserve(tours.size());
  for (const auto& t : tours) v.push_back(t.visits_top);
  return v;
}

double mean_and_se(const std::vector<double>& xs, double& se) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  se = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

double cv(const std::vector<double>& r) {
  const double m = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
  double ss = 0.0;
  for (double x : r) ss += (x - m) * (x - m);
  return std::sqrt(ss / r.size()) / m;
}

const std::vector<std::pair<std::size_t, double>>& te_configs() {
  static const std::vector<std::pair<std::size_t, double>> c = {{1, 0.5}, {6, 0.2}, {10, 0.05}};
  return c;
}

const AdaptResult& tuned_toy() {
  static const AdaptResult res = [] {
    ToyGaussian toy(kToyDim, kM, kSigma0);
    Rng rng(2024);
    AdaptOptions opt;
    opt.initial_levels = 8;
    opt.workers = workers();
    return adapt(toy, opt, rng);
  }();
  return res;
}

// ---------------------------------------------------------------------------
// 1. closed-form tour effectiveness
// ---------------------------------------------------------------------------

Outcome te_closed_forms() {
  Outcome o{true, ""};
  for (const auto& [n, rho] : te_configs()) {
    const auto chain = IdealIndexChain::equi_rejection(n, rho);
    double te[2];
    for (int k = 0; k < 2; ++k) {
      const Variant var = k == 0 ? Variant::nrst : Variant::st;
      Rng rng = Rng::stream(1, 10 * n + k);
      const auto tours = simulate_index_tours(chain, var, 1'000'000, rng);
      const auto v = visit_counts(tours);
      te[k] = estimate_te(v);
      const double exact = ideal_te(chain, var);
      const double err = std::abs(te[k] - exact);
      if (err >= 0.01) o.pass = false;
      o.detail += " " + std::string(to_string(var)) + "(" + std::to_string(n) + "," + fmt(rho) +
                  ")=" + fmt(te[k]) + "/" + fmt(exact);
    }
    if (!(te[0] > te[1])) o.pass = false;
  }
  return o;
}

// ---------------------------------------------------------------------------
// 2. regeneration identities
// ---------------------------------------------------------------------------

Outcome regeneration_identities() {
  Outcome o{true, ""};
  for (const auto& [n, rho] : te_configs()) {
    Rng rng = Rng::stream(2, n);
    const auto tours =
        simulate_index_tours(IdealIndexChain::equi_rejection(n, rho), Variant::nrst, 100'000, rng);
    std::vector<double> tau, visits;
    for (const auto& t : tours) {
      tau.push_back(static_cast<double>(t.tau));
      visits.push_back(static_cast<double>(t.visits_top));
    }
    double se_tau = 0.0, se_v = 0.0;
    const double m_tau = mean_and_se(tau, se_tau);
    const double m_v = mean_and_se(visits, se_v);
    const double want_tau = 2.0 * (n + 1.0);
    const double z_tau = std::abs(m_tau - want_tau) / se_tau;
    const double z_v = std::abs(m_v - 2.0) / se_v;
    if (z_tau > 3.0 || z_v > 3.0) o.pass = false;
    o.detail += " N=" + std::to_string(n) + " tau=" + fmt(m_tau) + "(z=" + fmt(z_tau, 2) +
                ") visits=" + fmt(m_v) + "(z=" + fmt(z_v, 2) + ")";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 3. TE limit under equi-rejection
// ---------------------------------------------------------------------------

Outcome te_limit() {
  Outcome o{true, ""};
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double limit = te_infinity(lambda);
    double gap[2];
    const std::size_t sizes[2] = {16, 64};
    for (int k = 0; k < 2; ++k) {
      const std::size_t n = sizes[k];
      Rng rng = Rng::stream(3, static_cast<std::uint64_t>(lambda * 100) * 1000 + n);
      const auto tours = simulate_index_tours(
          IdealIndexChain::equi_rejection(n, lambda / static_cast<double>(n)), Variant::nrst,
          1'000'000, rng);
      const double te = estimate_te(visit_counts(tours));
      gap[k] = std::abs(te - limit) / limit;
      o.detail += " L=" + fmt(lambda) + ",N=" + std::to_string(n) + ":" + fmt(te) + "/" +
                  fmt(limit);
    }
    if (gap[1] >= 0.10 || !(gap[0] > gap[1])) o.pass = false;
  }
  return o;
}

// ---------------------------------------------------------------------------
// 4. stepping-stone accuracy
// ---------------------------------------------------------------------------

Outcome stepping_stone() {
  ToyGaussian toy(kToyDim, kM, kSigma0);
  Rng rng(404);
  AdaptOptions opt;
  opt.initial_levels = 8;
  opt.allow_restart = false;
  opt.workers = workers();
  const auto tuned = adapt(toy, opt, rng);
  Rng scan_rng(405);
  const auto data = run_nrpt(toy, tuned.schedule, 10'000, scan_rng, workers());
  const auto log_z = stepping_stone_logz(data, tuned.schedule.betas);
  const double truth = analytic_gaussian_path(kToyDim, kM, kSigma0, 1.0).log_z;
  const double err = std::abs(log_z.back() - truth);
  return {err <= 0.05 && tuned.schedule.top_level() == 8,
          " N=" + std::to_string(tuned.schedule.top_level()) + " logZ=" + fmt(log_z.back(), 6) +
              " truth=" + fmt(truth, 6) + " err=" + fmt(err, 3)};
}

// ---------------------------------------------------------------------------
// 5. equi-rejection after adaptation
// ---------------------------------------------------------------------------

Outcome adapted_equi_rejection() {
  Outcome o{true, ""};
  const ConvergenceThresholds th;
  auto judge = [&](const std::string& name, const AdaptResult& res) {
    const double spread = cv(res.rejections.sym);
    const double asym = res.rounds.back().indicators.direction_asymmetry;
    // rounds of the final pass
    std::size_t pass_rounds = 0;
    for (const auto& r : res.rounds) pass_rounds = r.round == 1 ? 1 : pass_rounds + 1;
    const bool ok = res.converged && pass_rounds <= 12 && spread < th.rejection_spread &&
                    asym < th.direction_asymmetry;
    if (!ok) o.pass = false;
    const auto& ind = res.rounds.back().indicators;
    o.detail += " " + name + ": converged=" + (res.converged ? "yes" : "no") +
                " rounds=" + std::to_string(pass_rounds) + "/" + std::to_string(res.rounds.size()) +
                " cv=" + fmt(spread, 3) +
                " asym=" + fmt(asym, 3) + " dc=" + fmt(ind.affinity_change, 3) +
                " dL=" + fmt(ind.barrier_change, 3);
  };
  judge("toy", tuned_toy());
  auto banana = make_model(ModelSpec{"banana", {}, 1});
  Rng rng(505);
  AdaptOptions opt;
  opt.workers = workers();
  judge("banana", adapt(*banana, opt, rng));
  return o;
}

// ---------------------------------------------------------------------------
// 6. posterior-mean coverage
// ---------------------------------------------------------------------------

Outcome coverage() {
  ToyGaussian toy(kToyDim, kM, kSigma0);
  const auto& tuned = tuned_toy();
  const double truth = kM * kSigma0 * kSigma0 / (1.0 + kSigma0 * kSigma0);
  int covered = 0;
  for (int r = 0; r < 100; ++r) {
    RunOptions opt;
    opt.alpha = 0.95;
    opt.delta = 0.5;
    opt.seed = 6000 + r;
    opt.workers = workers();
    opt.keep_traces = false;
    const auto rep = pilot_then_run(toy, tuned.schedule, tuned.barrier.total(), opt);
    const auto& ci = rep.diagnostics.functions.at(0).ci;
    if (ci.lo <= truth && truth <= ci.hi) ++covered;
  }
  return {covered >= 90, " covered=" + std::to_string(covered) + "/100 truth=" + fmt(truth)};
}

// ---------------------------------------------------------------------------
// 7. optimal grid size
// ---------------------------------------------------------------------------

Outcome grid_size() {
  Outcome o{true, ""};
  for (double lambda : {0.5, 1.0, 3.0}) {
    const auto cost = [lambda](double n) {
      return 2.0 * (n + 1.0) * (n * (1.0 + 2.0 * lambda) - lambda) / (n - lambda);
    };
    double best_n = 0.0, best = INFINITY;
    for (long k = 1;; ++k) {
      const double n = lambda + 1e-4 * static_cast<double>(k);
      if (n > 100.0) break;
      const double c = cost(n);
      if (c < best) {
        best = c;
        best_n = n;
      }
    }
    const double n_star = optimal_grid_size_unrounded(lambda);
    const bool ok = std::abs(n_star - best_n) <= 1e-3 && n_star > 2.0 * lambda &&
                    n_star < (1.0 + std::sqrt(2.0)) * lambda;
    if (!ok) o.pass = false;
    o.detail += " L=" + fmt(lambda) + ":" + fmt(n_star, 7) + "/" + fmt(best_n, 7);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 8. minimum tour count
// ---------------------------------------------------------------------------

Outcome k_min() {
  const auto a = min_tours(0.95, 0.5, 1.0);
  const auto b = min_tours(0.95, 0.5, 0.25);
  bool ok = a == 62 && b == 246;
  Rng rng(808);
  int violations = 0;
  for (int s = 0; s < 100; ++s) {
    const double alpha = rng.uniform(0.5, 0.99);
    const double delta = rng.uniform(0.01, 1.0);
    const double te = rng.uniform(0.01, 1.0);
    const auto k = min_tours(alpha, delta, te);
    if (min_tours(std::min(alpha + 0.005, 0.999), delta, te) < k) ++violations;
    if (min_tours(alpha, delta * 1.1, te) > k) ++violations;
    if (min_tours(alpha, delta, std::min(te * 1.1, 1.0)) > k) ++violations;
    const double z = z_alpha(alpha);
    if (static_cast<double>(k) < 4.0 / te * (z / delta) * (z / delta) - 1e-9) ++violations;
  }
  ok = ok && violations == 0;
  return {ok, " K(1)=" + std::to_string(a) + " K(0.25)=" + std::to_string(b) +
                  " sweep violations=" + std::to_string(violations)};
}

// ---------------------------------------------------------------------------
// 9. planner invariants
// ---------------------------------------------------------------------------

Outcome planner() {
  const std::vector<double> hand = {4, 3, 2, 1};
  const double hand_makespan = simulate_pool(hand, 2).makespan;
  bool ok = hand_makespan == 5.0;
  int violations = 0;
  Rng rng(909);
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<double> times(1 + static_cast<std::size_t>(rng.uniform() * 60));
    for (auto& t : times) t = rng.exponential() + 0.01;
    const double total = std::accumulate(times.begin(), times.end(), 0.0);
    const double longest = *std::max_element(times.begin(), times.end());
    double prev = INFINITY;
    for (std::size_t p = 1; p <= 16; ++p) {
      const double ms = simulate_pool(times, p).makespan;
      if (ms > prev + 1e-12) ++violations;
      if (ms < std::max(longest, total / static_cast<double>(p)) - 1e-12) ++violations;
      prev = ms;
    }
  }
  std::vector<double> sample(200);
  for (auto& t : sample) t = 0.1 + rng.exponential();
  const auto model = fit_cpu_model(sample);
  const std::vector<std::size_t> pools = {1, 2, 4, 8, 16, 32};
  const auto curves = cost_curves(model, 100, pools, 20, 99, false, workers());
  for (const auto& c : curves) {
    if (c.cloud_mean != curves.front().cloud_mean) ++violations;
  }
  for (std::size_t i = 1; i < curves.size(); ++i) {
    if (curves[i].makespan_mean > curves[i - 1].makespan_mean + 1e-12) ++violations;
  }
  ok = ok && violations == 0;
  return {ok, " hand makespan=" + fmt(hand_makespan) + " violations=" + std::to_string(violations)};
}

// ---------------------------------------------------------------------------
// 10. worker-count determinism
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  ToyGaussian toy(kToyDim, kM, kSigma0);
  const auto dir = std::filesystem::temp_directory_path() / "nrst_acceptance_determinism";
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  std::uint64_t k = 0;
  for (unsigned w : {1u, 4u, 8u}) {
    RunOptions opt;
    opt.seed = 1010;
    opt.workers = w;
    const auto rep = run_parallel(toy, Schedule::uniform(6), 0.2, opt);
    k = rep.k();
    const auto path = dir / ("traces_" + std::to_string(w) + ".csv");
    io::write_traces_csv(path, rep.traces);
    files.push_back(slurp(path));
  }
  std::filesystem::remove_all(dir);
  const bool ok = !files[0].empty() && files[0] == files[1] && files[0] == files[2];
  return {ok, " tours=" + std::to_string(k) + " bytes=" + std::to_string(files[0].size())};
}

// ---------------------------------------------------------------------------
// 11. NRST versus ST cost
// ---------------------------------------------------------------------------

Outcome nrst_vs_st() {
  ToyGaussian toy(kToyDim, kM, kSigma0);
  const auto& tuned = tuned_toy();
  int wins = 0;
  double ratio_sum = 0.0;
  for (int r = 0; r < 30; ++r) {
    std::uint64_t cost[2];
    for (int k = 0; k < 2; ++k) {
      RunOptions opt;
      opt.variant = k == 0 ? Variant::nrst : Variant::st;
      opt.seed = 11000 + r;
      opt.workers = workers();
      opt.keep_traces = false;
      cost[k] = pilot_then_run(toy, tuned.schedule, tuned.barrier.total(), opt).serial_cost;
    }
    if (cost[1] > cost[0]) ++wins;
    ratio_sum += static_cast<double>(cost[1]) / static_cast<double>(cost[0]);
  }
  return {wins >= 25,
          " st>nrst in " + std::to_string(wins) + "/30 mean ratio=" + fmt(ratio_sum / 30.0, 3)};
}

// ---------------------------------------------------------------------------
// 12. variance bound
// ---------------------------------------------------------------------------

Outcome variance_bound() {
  Outcome o{true, ""};
  for (const auto& [n, rho] : te_configs()) {
    for (Variant var : {Variant::nrst, Variant::st}) {
      Rng rng = Rng::stream(12, 10 * n + (var == Variant::nrst ? 0 : 1));
      const auto tours =
          simulate_index_tours(IdealIndexChain::equi_rejection(n, rho), var, 100'000, rng);
      // h = +-1 fixed per tour, and h = +-1 drawn per top-level visit.
      TourStatistics per_tour, per_visit;
      per_tour.num_functions = per_visit.num_functions = 1;
      for (const auto& t : tours) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        double coins = 0.0;
        for (std::uint64_t j = 0; j < t.visits_top; ++j) coins += rng.uniform() < 0.5 ? -1.0 : 1.0;
        per_tour.tours.push_back({t.tau, t.visits_top, {sign * static_cast<double>(t.visits_top)}});
        per_visit.tours.push_back({t.tau, t.visits_top, {coins}});
      }
      const double te = estimate_te(per_tour.visit_counts());
      const double bound = 4.0 / te * 1.05;
      const double s1 = estimate_sigma2(per_tour, 0);
      const double s2 = estimate_sigma2(per_visit, 0);
      if (!(s1 <= bound && s2 <= bound)) o.pass = false;
      o.detail += " " + std::string(to_string(var)) + "(" + std::to_string(n) + "):" +
                  fmt(std::max(s1, s2)) + "<=" + fmt(bound);
    }
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "closed-form tour effectiveness", te_closed_forms},
      {2, "regeneration identities", regeneration_identities},
      {3, "TE limit under equi-rejection", te_limit},
      {4, "stepping-stone accuracy", stepping_stone},
      {5, "equi-rejection after adaptation", adapted_equi_rejection},
      {6, "posterior-mean coverage", coverage},
      {7, "optimal grid size", grid_size},
      {8, "minimum tour count", k_min},
      {9, "planner invariants", planner},
      {10, "worker-count determinism", determinism},
      {11, "NRST versus ST cost", nrst_vs_st},
      {12, "variance bound", variance_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string(" exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " ("
              << fmt(secs, 3) << " s):" << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
