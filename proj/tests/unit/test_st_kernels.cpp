#include <cmath>
#include <map>

#include "doctest.h"
#include "nrst/bench_models.hpp"
#include "nrst/errors.hpp"
#include "nrst/st_kernels.hpp"
#include "support.hpp"

using namespace nrst;
using testing::IdentityExplorer;
using testing::PointModel;

namespace {

Schedule schedule_with(std::vector<double> betas, std::vector<double> affinities) {
  Schedule s;
  s.betas = std::move(betas);
  s.affinities = std::move(affinities);
  s.explore_steps.assign(s.betas.size() - 1, 1);
  return s;
}

ChainState state_at(int level, int direction, double v) {
  ChainState s;
  s.x = {0.0};
  s.level = level;
  s.direction = direction;
  s.v = v;
  return s;
}

void check_trace_structure(const TourTrace& t, int top, Variant variant) {
  REQUIRE(t.steps.size() >= 2);
  CHECK(t.steps.front().level == 0);
  CHECK(t.steps.front().direction == +1);
  CHECK(t.steps.back().level == 0);
  if (variant == Variant::nrst) CHECK(t.steps.back().direction == -1);
  std::uint64_t top_count = 0;
  for (std::size_t s = 0; s < t.steps.size(); ++s) {
    const auto& r = t.steps[s];
    if (r.level == top) ++top_count;
    if (s > 0 && s + 1 < t.steps.size()) {
      if (variant == Variant::nrst) {
        CHECK_FALSE((r.level == 0 && r.direction == -1));
      } else {
        CHECK(r.level != 0);
      }
    }
    if (s > 0) CHECK(std::abs(r.level - t.steps[s - 1].level) <= 1);
  }
  CHECK(top_count == t.visits_top);
}

/// Exact transition matrix of the lifted chain on a one-point state space,
/// assembled from forced accept / reject / proposal outcomes of the kernels.
TransitionMatrix exact_kernel(const Schedule& sched, double v, Variant variant) {
  PointModel model(v);
  IdentityExplorer id;
  PotentialEvaluator eval(model);
  Rng rng(0);
  const int n = static_cast<int>(sched.top_level());
  TransitionMatrix k;
  k.size = 2 * static_cast<std::size_t>(n + 1);
  k.data.assign(k.size * k.size, 0.0);
  for (int i = 0; i <= n; ++i) {
    for (int eps : {+1, -1}) {
      const auto row = TransitionMatrix::index(i, eps);
      const auto from = state_at(i, eps, v);
      if (variant == Variant::nrst) {
        const int target = i + eps;
        if (target < 0 || target > n) {
          const auto to = nrst_step(from, sched, id, eval, rng);
          k(row, TransitionMatrix::index(to.level, to.direction)) += 1.0;
          continue;
        }
        const double a = acceptance_probability(v, sched.betas[i], sched.betas[target],
                                                sched.affinities[i], sched.affinities[target]);
        const auto acc = nrst_step(from, sched, id, eval, rng, {ForcedMove::accept, 0});
        const auto rej = nrst_step(from, sched, id, eval, rng, {ForcedMove::reject, 0});
        k(row, TransitionMatrix::index(acc.level, acc.direction)) += a;
        k(row, TransitionMatrix::index(rej.level, rej.direction)) += 1.0 - a;
      } else {
        for (int prop : {+1, -1}) {
          const int target = i + prop;
          double a = 0.0;
          if (target >= 0 && target <= n) {
            a = acceptance_probability(v, sched.betas[i], sched.betas[target], sched.affinities[i],
                                       sched.affinities[target]);
          }
          const auto acc = st_step(from, sched, id, eval, rng, {ForcedMove::accept, prop});
          const auto rej = st_step(from, sched, id, eval, rng, {ForcedMove::reject, prop});
          if (target >= 0 && target <= n) {
            k(row, TransitionMatrix::index(acc.level, acc.direction)) += 0.5 * a;
          } else {
            CHECK(acc.level == i);
          }
          k(row, TransitionMatrix::index(rej.level, rej.direction)) += 0.5 * (1.0 - a);
        }
      }
    }
  }
  return k;
}

double empirical_te(const std::vector<IndexTour>& tours) {
  std::vector<std::uint64_t> v;
  for (const auto& t : tours) v.push_back(t.visits_top);
  double s = 0.0, s2 = 0.0;
  for (auto x : v) {
    s += static_cast<double>(x);
    s2 += static_cast<double>(x) * static_cast<double>(x);
  }
  return s * s / (static_cast<double>(v.size()) * s2);
}

}  // namespace

TEST_CASE("variant names") {
  CHECK(parse_variant("nrst") == Variant::nrst);
  CHECK(parse_variant("st") == Variant::st);
  CHECK(std::string(to_string(Variant::st)) == "st");
  CHECK_THROWS_AS(parse_variant("pt"), InvalidArgument);
}

TEST_CASE("nrst_step moves") {
  const auto sched = schedule_with({0.0, 0.5, 1.0}, {0.0, 0.0, 0.0});
  ToyGaussian toy(1, 2.0, 2.0);
  IdentityExplorer id;
  PotentialEvaluator eval(toy);
  Rng rng(1);

  SUBCASE("rejection at level 0 lands in the atom with a fresh reference draw") {
    auto s = state_at(0, +1, toy.potential(Point{123.0}));
    s.x = {123.0};
    const auto out = nrst_step(s, sched, id, eval, rng, {ForcedMove::reject, 0});
    CHECK(out.level == 0);
    CHECK(out.direction == -1);
    CHECK(out.in_nrst_atom());
    CHECK(out.x[0] != 123.0);
    CHECK(out.v == toy.potential(out.x));
  }
  SUBCASE("bounce at the top") {
    PointModel pm(3.0);
    PotentialEvaluator pe(pm);
    Rng r1(5), r2(5);
    const auto out = nrst_step(state_at(2, +1, 3.0), sched, id, pe, r1);
    CHECK(out.level == 2);
    CHECK(out.direction == -1);
    CHECK(r1.next() == r2.next());  // no acceptance draw consumed
  }
  SUBCASE("bounce at the bottom") {
    const auto out = nrst_step(state_at(0, -1, 0.0), sched, id, eval, rng);
    CHECK(out.level == 0);
    CHECK(out.direction == +1);
  }
  SUBCASE("forced accept moves in the current direction") {
    const auto out = nrst_step(state_at(1, -1, 1.0), sched, id, eval, rng, {ForcedMove::accept, 0});
    CHECK(out.level == 0);
    CHECK(out.direction == -1);
  }
  SUBCASE("invalid state") {
    CHECK_THROWS_AS(nrst_step(state_at(3, +1, 0.0), sched, id, eval, rng), InvalidArgument);
    CHECK_THROWS_AS(nrst_step(state_at(1, 0, 0.0), sched, id, eval, rng), InvalidArgument);
  }
}

TEST_CASE("interior acceptance frequency matches the acceptance probability") {
  const auto sched = schedule_with({0.0, 0.3, 0.7, 1.0}, {0.0, 0.2, 0.5, 0.4});
  IdentityExplorer id;
  const double v = 1.7;
  PointModel pm(v);
  PotentialEvaluator eval(pm);
  Rng rng(99);
  const int n = 100000;

  SUBCASE("nrst") {
    int accepted = 0;
    for (int k = 0; k < n; ++k) {
      if (nrst_step(state_at(1, +1, v), sched, id, eval, rng).level == 2) ++accepted;
    }
    const double p = acceptance_probability(v, 0.3, 0.7, 0.2, 0.5);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(accepted / double(n) - p) < 3.0 * se);
  }
  SUBCASE("st with forced upward proposal") {
    int accepted = 0;
    for (int k = 0; k < n; ++k) {
      if (st_step(state_at(1, -1, v), sched, id, eval, rng, {ForcedMove::none, +1}).level == 2) {
        ++accepted;
      }
    }
    const double p = acceptance_probability(v, 0.3, 0.7, 0.2, 0.5);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(accepted / double(n) - p) < 3.0 * se);
  }
  SUBCASE("st with random proposals") {
    std::map<int, int> counts;
    for (int k = 0; k < n; ++k) ++counts[st_step(state_at(2, +1, v), sched, id, eval, rng).level];
    const double p_up = 0.5 * acceptance_probability(v, 0.7, 1.0, 0.5, 0.4);
    const double p_dn = 0.5 * acceptance_probability(v, 0.7, 0.3, 0.5, 0.2);
    CHECK(std::abs(counts[3] / double(n) - p_up) < 3.0 * std::sqrt(p_up * (1 - p_up) / n));
    CHECK(std::abs(counts[1] / double(n) - p_dn) < 3.0 * std::sqrt(p_dn * (1 - p_dn) / n));
  }
}

TEST_CASE("st_step boundaries") {
  const auto sched = schedule_with({0.0, 1.0}, {0.0, 0.0});
  IdentityExplorer id;
  PointModel pm(0.0);
  PotentialEvaluator eval(pm);
  Rng rng(3);
  const auto down = st_step(state_at(0, +1, 0.0), sched, id, eval, rng, {ForcedMove::none, -1});
  CHECK(down.level == 0);
  CHECK(down.direction == -1);
  const auto up = st_step(state_at(1, +1, 0.0), sched, id, eval, rng, {ForcedMove::none, +1});
  CHECK(up.level == 1);
  for (int k = 0; k < 1000; ++k) {
    auto s = st_step(state_at(k % 2, +1, 0.0), sched, id, eval, rng, {ForcedMove::reject, 0});
    CHECK(s.level == k % 2);
  }
}

TEST_CASE("lifted target is invariant on a one-point model") {
  const double v = 0.8;
  const auto sched = schedule_with({0.0, 0.2, 0.45, 0.8, 1.0}, {0.0, 0.3, -0.1, 0.9, 0.5});
  const int n = static_cast<int>(sched.top_level());
  std::vector<double> p(static_cast<std::size_t>(n + 1));
  double z = 0.0;
  for (int i = 0; i <= n; ++i) z += p[i] = std::exp(-sched.betas[i] * v + sched.affinities[i]);
  for (auto& x : p) x /= z;

  std::vector<double> lifted(2 * p.size());
  for (int i = 0; i <= n; ++i) {
    lifted[TransitionMatrix::index(i, +1)] = p[i] / 2;
    lifted[TransitionMatrix::index(i, -1)] = p[i] / 2;
  }

  SUBCASE("nrst: full lifted invariance") {
    const auto k = exact_kernel(sched, v, Variant::nrst);
    const auto out = k.left_multiply(lifted);
    for (std::size_t s = 0; s < out.size(); ++s) CHECK(out[s] == doctest::Approx(lifted[s]).epsilon(1e-12));
  }
  SUBCASE("st: level marginal invariance") {
    const auto k = exact_kernel(sched, v, Variant::st);
    const auto out = k.left_multiply(lifted);
    for (int i = 0; i <= n; ++i) {
      const double m = out[TransitionMatrix::index(i, +1)] + out[TransitionMatrix::index(i, -1)];
      CHECK(m == doctest::Approx(p[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("run_tour examples") {
  IdentityExplorer id;
  PointModel pm(1.0);
  Rng rng(4);

  SUBCASE("forced first rejection") {
    TourOptions opt;
    opt.step.force = ForcedMove::reject;
    const auto t = run_tour(pm, Schedule::uniform(3), id, rng, opt);
    CHECK(t.kernel_steps() == 1);
    CHECK(t.tau() == 2);
    CHECK(t.visits_top == 0);
    check_trace_structure(t, 3, Variant::nrst);
  }
  SUBCASE("N = 1, all accepted") {
    TourOptions opt;
    opt.step.force = ForcedMove::accept;
    const auto t = run_tour(pm, Schedule::uniform(1), id, rng, opt);
    CHECK(t.kernel_steps() == 3);
    CHECK(t.visits_top == 2);
    std::vector<int> levels, dirs;
    for (const auto& r : t.steps) {
      levels.push_back(r.level);
      dirs.push_back(r.direction);
    }
    CHECK(levels == std::vector<int>{0, 1, 1, 0});
    CHECK(dirs == std::vector<int>{1, 1, -1, -1});
  }
  SUBCASE("rejection at level 0 never overruns") {
    TourOptions opt;
    opt.step.force = ForcedMove::reject;
    opt.max_steps = 5;
    for (int k = 0; k < 100; ++k) CHECK_NOTHROW(run_tour(pm, Schedule::uniform(4), id, rng, opt));
  }
  SUBCASE("overrun carries the partial trace") {
    TourOptions opt;
    opt.step.force = ForcedMove::accept;
    opt.max_steps = 5;
    try {
      run_tour(pm, Schedule::uniform(10), id, rng, opt);
      FAIL("expected TourOverrun");
    } catch (const TourOverrun& e) {
      CHECK(e.partial_trace().kernel_steps() == 5);
      CHECK(e.partial_trace().steps.back().level == 5);
    }
  }
  SUBCASE("max_steps must be positive") {
    TourOptions opt;
    opt.max_steps = 0;
    CHECK_THROWS_AS(run_tour(pm, Schedule::uniform(1), id, rng, opt), InvalidArgument);
  }
  SUBCASE("test functions are evaluated only at the top level") {
    ToyGaussian toy(2, 2.0, 2.0);
    SliceExplorer slice;
    const auto tfs = toy.test_functions();
    TourOptions opt;
    opt.test_functions = &tfs;
    for (int k = 0; k < 50; ++k) {
      const auto t = run_tour(toy, Schedule::uniform(3), slice, rng, opt);
      check_trace_structure(t, 3, Variant::nrst);
      for (const auto& r : t.steps) CHECK(r.h.size() == (r.level == 3 ? tfs.size() : 0));
      CHECK(t.v_evals > 0);
    }
  }
  SUBCASE("st tours end at any return to level 0") {
    ToyGaussian toy(2, 2.0, 2.0);
    SliceExplorer slice;
    TourOptions opt;
    opt.variant = Variant::st;
    for (int k = 0; k < 50; ++k) {
      check_trace_structure(run_tour(toy, Schedule::uniform(3), slice, rng, opt), 3, Variant::st);
    }
  }
}

TEST_CASE("ideal tour effectiveness") {
  CHECK(ideal_te(IdealIndexChain::equi_rejection(5, 0.0), Variant::nrst) == 1.0);
  CHECK(ideal_te(IdealIndexChain::equi_rejection(1, 0.5), Variant::nrst) == doctest::Approx(1.0 / 3));
  CHECK(ideal_te(IdealIndexChain::equi_rejection(1, 0.5), Variant::st) == doctest::Approx(1.0 / 7));
  CHECK(ideal_te(IdealIndexChain::equi_rejection(6, 0.2), Variant::nrst) == doctest::Approx(0.25));
  CHECK(ideal_te(IdealIndexChain::equi_rejection(6, 0.2), Variant::st) == doctest::Approx(1.0 / 29));
  CHECK_THROWS_AS(ideal_te(IdealIndexChain::equi_rejection(2, 1.0), Variant::nrst), InvalidArgument);
  CHECK_THROWS_AS(ideal_te(IdealIndexChain{{}, {}}, Variant::nrst), InvalidArgument);

  Rng rng(21);
  for (int k = 0; k < 500; ++k) {
    const auto n = 1 + rng.index(30);
    std::vector<double> up(n), down(n);
    for (std::size_t i = 0; i < n; ++i) {
      up[i] = 0.999 * rng.uniform();
      down[i] = 0.999 * rng.uniform();
    }
    const IdealIndexChain chain{up, down};
    CHECK(ideal_te(chain, Variant::nrst) > ideal_te(chain, Variant::st));
  }
}

TEST_CASE("index kernel") {
  SUBCASE("zero rejection N = 1 is a deterministic 4-cycle") {
    const auto k = index_kernel(IdealIndexChain::equi_rejection(1, 0.0), Variant::nrst);
    using T = TransitionMatrix;
    CHECK(k(T::index(0, +1), T::index(1, +1)) == 1.0);
    CHECK(k(T::index(1, +1), T::index(1, -1)) == 1.0);
    CHECK(k(T::index(1, -1), T::index(0, -1)) == 1.0);
    CHECK(k(T::index(0, -1), T::index(0, +1)) == 1.0);
  }
  SUBCASE("row stochastic and uniform stationarity") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const auto n = 1 + rng.index(12);
      std::vector<double> rho(n);
      for (auto& r : rho) r = 0.99 * rng.uniform();
      const auto chain = IdealIndexChain::symmetric(rho);
      for (auto variant : {Variant::nrst, Variant::st}) {
        const auto k = index_kernel(chain, variant);
        for (std::size_t r = 0; r < k.size; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < k.size; ++c) {
            CHECK(k(r, c) >= 0.0);
            s += k(r, c);
          }
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        const std::vector<double> uniform(k.size, 1.0 / static_cast<double>(k.size));
        const auto out = k.left_multiply(uniform);
        if (variant == Variant::nrst) {
          for (double x : out) CHECK(x == doctest::Approx(uniform[0]).epsilon(1e-12));
        } else {
          // direction carries the last proposal, so only the level marginal is uniform
          for (std::size_t i = 0; i < k.size; i += 2) {
            CHECK(out[i] + out[i + 1] == doctest::Approx(2.0 * uniform[0]).epsilon(1e-12));
          }
        }
      }
    }
  }
  SUBCASE("st rows mix both proposals") {
    const auto k = index_kernel(IdealIndexChain::equi_rejection(3, 0.0), Variant::st);
    using T = TransitionMatrix;
    for (int eps : {+1, -1}) {
      CHECK(k(T::index(1, eps), T::index(2, +1)) == 0.5);
      CHECK(k(T::index(1, eps), T::index(0, -1)) == 0.5);
      CHECK(k(T::index(0, eps), T::index(0, -1)) == 0.5);
      CHECK(k(T::index(0, eps), T::index(1, +1)) == 0.5);
    }
  }
}

TEST_CASE("simulate_index_tours") {
  Rng rng(2);
  SUBCASE("zero rejection is deterministic") {
    const auto tours = simulate_index_tours(IdealIndexChain::equi_rejection(4, 0.0), Variant::nrst, 1000, rng);
    for (const auto& t : tours) {
      CHECK(t.visits_top == 2);
      CHECK(t.tau == 10);
    }
    CHECK(empirical_te(tours) == 1.0);
  }
  SUBCASE("N = 1, rho = 0.5") {
    const auto tours = simulate_index_tours(IdealIndexChain::equi_rejection(1, 0.5), Variant::nrst, 1000000, rng);
    std::vector<double> v;
    for (const auto& t : tours) v.push_back(static_cast<double>(t.visits_top));
    double var = 0.0;
    const double m = testing::mean_of(v);
    for (double x : v) var += (x - m) * (x - m);
    const double se = std::sqrt(var / (v.size() - 1.0) / v.size());
    CHECK(std::abs(m - 2.0) < 3.0 * se);
    CHECK(std::abs(empirical_te(tours) - 1.0 / 3) < 0.01);
  }
  SUBCASE("st, N = 6, rho = 0.2") {
    const auto tours = simulate_index_tours(IdealIndexChain::equi_rejection(6, 0.2), Variant::st, 1000000, rng);
    CHECK(std::abs(empirical_te(tours) - 1.0 / 29) < 0.005);
  }
  CHECK_THROWS_AS(simulate_index_tours(IdealIndexChain::equi_rejection(1, 0.5), Variant::nrst, 0, rng),
                  InvalidArgument);
}

TEST_CASE("regeneration identities with exact exploration") {
  const std::size_t d = 1;
  ToyGaussian toy(d, 2.0, 2.0);
  testing::ExactGaussianExplorer exact(toy);
  const auto sched0 = Schedule::uniform(4);
  Schedule sched = sched0;
  for (std::size_t i = 0; i < sched.betas.size(); ++i) {
    sched.affinities[i] = -testing::toy_log_z(d, 2.0, 2.0, sched.betas[i]);
  }
  const auto n = sched.top_level();
  const int k = 100000;
  std::vector<double> tau(k), visits(k);
  for (int t = 0; t < k; ++t) {
    Rng rng = Rng::stream(31, t);
    const auto trace = run_tour(toy, sched, exact, rng);
    tau[t] = static_cast<double>(trace.tau());
    visits[t] = static_cast<double>(trace.visits_top);
  }
  auto se_of = [](const std::vector<double>& xs) {
    const double m = testing::mean_of(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / (xs.size() - 1.0) / xs.size());
  };
  const double expected_tau = 2.0 * static_cast<double>(n + 1);
  CHECK(std::abs(testing::mean_of(tau) - expected_tau) < 3.0 * se_of(tau));
  CHECK(std::abs(testing::mean_of(visits) - 2.0) < 3.0 * se_of(visits));
}
