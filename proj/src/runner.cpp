#include "nrst/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "nrst/errors.hpp"
#include "nrst/parallel.hpp"
#include "nrst/rng.hpp"

namespace nrst {

namespace {

RunReport assemble(std::vector<TourTrace> traces,
                   const RunOptions& options, std::vector<std::string> names) {
  RunReport report;
  report.variant = options.variant;
  report.seed = options.seed;
  report.alpha = options.alpha;
  report.delta = options.delta;
  report.tours.reserve(traces.size());
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& t = traces[k];
    report.tours.push_back({k, t.tau(), t.visits_top, t.v_evals, t.cpu_seconds});
    report.serial_cost += t.v_evals;
    report.parallel_cost = std::max(report.parallel_cost, t.v_evals);
  }
  report.stats = TourStatistics::from_traces(traces, names.size());
  if (report.stats.total_visits() > 0) {
    report.diagnostics = summarize(report.stats, names, options.alpha);
  } else {
    report.diagnostics.k = report.stats.size();
    report.diagnostics.alpha = options.alpha;
    report.diagnostics.te_hat = 0.0;
  }
  if (options.keep_traces) report.traces = std::move(traces);
  return report;
}

std::vector<std::string> function_names(const std::vector<TestFunction>& fns) {
  std::vector<std::string> names;
  names.reserve(fns.size());
  for (const auto& f : fns) names.push_back(f.name);
  return names;
}

}  // namespace

void RunOptions::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be positive");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  if (max_tour_steps < 1) throw InvalidArgument("max_tour_steps must be >= 1");
}

RunAborted::RunAborted(std::uint64_t tour_index, const std::string& what)
    : std::runtime_error("tour " + std::to_string(tour_index) + ": " + what),
      tour_index_(tour_index) {}

std::vector<TourTrace> run_tours(const TemperedModel& model, const Schedule& schedule,
                                 const RunOptions& options, std::uint64_t first_index,
                                 std::uint64_t count) {
  schedule.validate();
  options.validate();
  const SliceExplorer default_explorer;
  const Explorer& explorer = options.explorer != nullptr ? *options.explorer : default_explorer;
  const auto functions = model.test_functions();

  TourOptions tour_opts;
  tour_opts.variant = options.variant;
  tour_opts.max_steps = options.max_tour_steps;
  tour_opts.test_functions = &functions;

  std::vector<TourTrace> traces(count);
  parallel_for(count, options.workers, [&](std::size_t k) {
    const std::uint64_t index = first_index + k;
    Rng rng = Rng::stream(options.seed, index);
    try {
      traces[k] = run_tour(model, schedule, explorer, rng, tour_opts);
    } catch (const TourOverrun& e) {
      throw RunAborted(index, e.what());
    }
  });
  return traces;
}

RunReport run_parallel(const TemperedModel& model, const Schedule& schedule, double te_hat,
                       const RunOptions& options) {
  if (!(te_hat > 0.0 && te_hat <= 1.0)) throw InvalidArgument("te_hat must lie in (0,1]");
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t k = min_tours(options.alpha, options.delta, te_hat);
  auto traces = run_tours(model, schedule, options, 0, k);
  RunReport report = assemble(std::move(traces), options,
                              function_names(model.test_functions()));
  report.te_input = te_hat;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RunReport pilot_then_run(const TemperedModel& model, const Schedule& schedule, double lambda_hat,
                         const RunOptions& options) {
  if (!(lambda_hat >= 0.0) || !std::isfinite(lambda_hat)) {
    throw InvalidArgument("lambda_hat must be finite and >= 0");
  }
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  const double te_inf = 1.0 / (1.0 + 2.0 * lambda_hat);
  const std::uint64_t k_trial = min_tours(options.alpha, options.delta, te_inf);
  auto traces = run_tours(model, schedule, options, 0, k_trial);

  std::vector<std::uint64_t> visits;
  visits.reserve(traces.size());
  for (const auto& t : traces) visits.push_back(t.visits_top);
  const double te_trial = estimate_te(visits);
  if (!(te_trial > 0.0)) throw NoTopVisits();

  const std::uint64_t k = min_tours(options.alpha, options.delta, te_trial);
  const std::uint64_t k_extra = k > k_trial ? k - k_trial : 0;
  if (k_extra > 0) {
    auto extra = run_tours(model, schedule, options, k_trial, k_extra);
    traces.insert(traces.end(), std::make_move_iterator(extra.begin()),
                  std::make_move_iterator(extra.end()));
  }
  RunReport report = assemble(std::move(traces), options,
                              function_names(model.test_functions()));
  report.te_input = te_trial;
  report.k_trial = k_trial;
  report.k_extra = k_extra;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace nrst
