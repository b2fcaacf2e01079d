#include "nrst/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nrst/errors.hpp"
#include "nrst/io.hpp"
#include "nrst/planner.hpp"
#include "nrst/runner.hpp"
#include "nrst/st_kernels.hpp"
#include "nrst/stats.hpp"

namespace nrst {

namespace fs = std::filesystem;
using io::json;

void RunConfig::validate() const {
  if (model.name.empty()) throw InvalidArgument("model: name must not be empty");
  if (!(gamma >= 1.0)) throw InvalidArgument("gamma: must be >= 1");
  if (!(kappa_bar > 0.0 && kappa_bar < 1.0)) throw InvalidArgument("kappa_bar: must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha: must lie in (0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta: must be positive");
  if (workers < 1) throw InvalidArgument("workers: must be >= 1");
  if (output_dir.empty()) throw InvalidArgument("out: must not be empty");
}

unsigned effective_workers(unsigned requested) {
  unsigned w = requested;
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NRST_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) throw InvalidArgument("NRST_THREADS: must be a positive integer");
    w = std::min<unsigned>(w, static_cast<unsigned>(cap));
  }
  return w;
}

namespace {

struct ModelFlags {
  std::string name;
  std::vector<std::string> params;
  std::uint64_t data_seed = 1;
};

void add_model_flags(CLI::App& sub, ModelFlags& m, bool required_name) {
  auto* opt = sub.add_option("--model", m.name, "Model name");
  if (required_name) opt->default_str("toy_gaussian");
  sub.add_option("--param", m.params, "Model parameter as key=value (repeatable)");
  sub.add_option("--data-seed", m.data_seed, "Seed of the synthetic dataset");
}

ModelSpec to_spec(const ModelFlags& m) {
  ModelSpec spec;
  spec.name = m.name;
  spec.data_seed = m.data_seed;
  for (const auto& kv : m.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgument("param: expected key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    try {
      std::size_t used = 0;
      const double v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
      spec.params[key] = v;
    } catch (const std::logic_error&) {
      throw InvalidArgument("param: value of '" + key + "' is not a number");
    }
  }
  return spec;
}

std::string scalar_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Fills options not given on the command line from a flat JSON object whose
// keys are long option names (dashes or underscores).
void apply_config(CLI::App& sub, const std::string& path) {
  json cfg = io::read_json(path);
  if (!cfg.is_object()) throw InvalidArgument("config: expected a JSON object");

  if (cfg.contains("model") && cfg.at("model").is_object()) {
    const auto spec = io::model_spec_from_json(cfg.at("model"));
    cfg["model"] = spec.name;
    if (!cfg.contains("param")) {
      json params = json::array();
      for (const auto& [k, v] : spec.params) params.push_back(k + "=" + json(v).dump());
      cfg["param"] = params;
    }
    if (!cfg.contains("data_seed")) cfg["data_seed"] = spec.data_seed;
  }

  std::vector<std::string> known;
  for (CLI::Option* opt : sub.get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string alt = name;
    std::replace(alt.begin(), alt.end(), '-', '_');
    known.push_back(name);
    known.push_back(alt);
    const std::string key = cfg.contains(name) ? name : (cfg.contains(alt) ? alt : "");
    if (key.empty() || opt->count() > 0) continue;
    const json& v = cfg.at(key);
    if (v.is_array()) {
      for (const auto& e : v) opt->add_result(scalar_string(e));
    } else if (v.is_object()) {
      if (name != "param") throw InvalidArgument("config." + key + ": unexpected object");
      for (const auto& [k, x] : v.items()) opt->add_result(k + "=" + scalar_string(x));
    } else {
      opt->add_result(scalar_string(v));
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw InvalidArgument("config." + key + ": " + e.what());
    }
  }
  for (const auto& [key, value] : cfg.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidArgument("config." + key + ": unknown setting for '" + sub.get_name() + "'");
    }
  }
}

struct TuneArgs {
  ModelFlags model{"toy_gaussian", {}, 1};
  std::size_t levels = 10;
  int max_rounds = 12;
  std::string affinity = "mean";
  double gamma = 2.0;
  double kappa_bar = 0.95;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out = ".";
  bool no_restart = false;
};

struct RunArgs {
  ModelFlags model;
  std::string schedule;
  double alpha = 0.95;
  double delta = 0.5;
  double te = 0.0;
  unsigned workers = 0;
  std::uint64_t seed = 1;
  std::string variant = "nrst";
  std::string out = ".";
  std::uint64_t max_tour_steps = kDefaultMaxTourSteps;
};

struct PlanArgs {
  std::string report;
  std::size_t k_extra = 2048;
  std::vector<std::size_t> pools{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048};
  std::size_t replications = 100;
  std::size_t bins = 30;
  std::uint64_t seed = 1;
  bool longest_first = false;
  unsigned workers = 0;
  std::string out = ".";
};

struct IndexSimArgs {
  std::vector<std::size_t> n{1, 6, 10};
  std::vector<double> rho{0.5, 0.2, 0.05};
  std::uint64_t tours = 1'000'000;
  std::uint64_t seed = 1;
  std::string out;
};

struct BenchArgs {
  ModelFlags model{"toy_gaussian", {}, 1};
  std::string schedule;
  std::size_t replicates = 1;
  std::size_t levels = 10;
  double alpha = 0.95;
  double delta = 0.5;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out;
};

RunConfig base_config(const ModelFlags& m, double alpha, double delta, std::uint64_t seed,
                      unsigned workers, const std::string& out) {
  RunConfig cfg;
  cfg.model = to_spec(m);
  cfg.alpha = alpha;
  cfg.delta = delta;
  cfg.seed = seed;
  cfg.workers = effective_workers(workers);
  cfg.output_dir = out;
  cfg.validate();
  return cfg;
}

void maybe_write_data(const ModelSpec& spec, const fs::path& dir) {
  Rng rng(spec.data_seed);
  const auto data = generate_synthetic_data(spec, rng);
  if (!data.rows.empty()) io::write_dataset_csv(dir / "data.csv", data);
}

int cmd_tune(const TuneArgs& a, std::ostream& out) {
  RunConfig cfg = base_config(a.model, 0.95, 0.5, a.seed, a.workers, a.out);
  cfg.affinity_mode = parse_affinity_mode(a.affinity);
  cfg.gamma = a.gamma;
  cfg.kappa_bar = a.kappa_bar;
  cfg.validate();
  if (a.levels < 1) throw InvalidArgument("levels: must be >= 1");
  if (a.max_rounds < 1) throw InvalidArgument("max_rounds: must be >= 1");

  const auto model = make_model(cfg.model);
  AdaptOptions opt;
  opt.initial_levels = a.levels;
  opt.max_rounds = a.max_rounds;
  opt.mode = cfg.affinity_mode;
  opt.gamma = cfg.gamma;
  opt.kappa_bar = cfg.kappa_bar;
  opt.allow_restart = !a.no_restart;
  opt.workers = cfg.workers;
  Rng rng(cfg.seed);
  const auto result = adapt(*model, opt, rng);

  const fs::path dir(cfg.output_dir);
  io::write_json(dir / "schedule.json", io::schedule_document(result, cfg.model));
  io::write_barrier_csv(dir / "barrier.csv", result.barrier);
  maybe_write_data(cfg.model, dir);

  out << "model " << model->name() << ": N = " << result.schedule.top_level()
      << ", lambda_hat = " << result.barrier.total()
      << ", converged = " << (result.converged ? "yes" : "no") << ", rounds = "
      << result.rounds.size() << (result.restarted ? " (grid size restarted)" : "") << '\n';
  out << "wrote " << (dir / "schedule.json").string() << ", " << (dir / "barrier.csv").string()
      << '\n';
  return 0;
}

void print_report(const RunReport& r, std::ostream& out) {
  out << to_string(r.variant) << ": K = " << r.k() << " (pilot " << r.k_trial << ", extra "
      << r.k_extra << "), te_hat = " << r.te_hat() << ", serial_cost = " << r.serial_cost
      << ", parallel_cost = " << r.parallel_cost << '\n';
  for (const auto& f : r.diagnostics.functions) {
    out << "  " << f.name << " = " << f.estimate << "  CI [" << f.ci.lo << ", " << f.ci.hi
        << "]\n";
  }
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const auto file = io::read_schedule(a.schedule);
  ModelFlags mf = a.model;
  RunConfig cfg = base_config(mf.name.empty() ? ModelFlags{"toy_gaussian", {}, 1} : mf, a.alpha,
                              a.delta, a.seed, a.workers, a.out);
  if (mf.name.empty() && file.model) cfg.model = *file.model;

  const auto model = make_model(cfg.model);
  if (file.schedule.betas.empty()) throw InvalidArgument("schedule: empty grid");
  RunOptions opt;
  opt.variant = parse_variant(a.variant);
  opt.alpha = cfg.alpha;
  opt.delta = cfg.delta;
  opt.workers = cfg.workers;
  opt.seed = cfg.seed;
  opt.max_tour_steps = a.max_tour_steps;
  const RunReport report = a.te > 0.0 ? run_parallel(*model, file.schedule, a.te, opt)
                                      : pilot_then_run(*model, file.schedule, file.lambda_hat, opt);

  const fs::path dir(cfg.output_dir);
  io::write_traces_csv(dir / "traces.csv", report.traces);
  io::write_json(dir / "report.json", io::report_document(report));
  maybe_write_data(cfg.model, dir);
  print_report(report, out);
  return 0;
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  if (a.k_extra < 1) throw InvalidArgument("k_extra: must be >= 1");
  if (a.pools.empty()) throw InvalidArgument("pools: need at least one pool size");
  for (auto p : a.pools) {
    if (p < 1) throw InvalidArgument("pools: sizes must be >= 1");
  }
  if (a.replications < 1) throw InvalidArgument("replications: must be >= 1");
  if (a.bins < 1) throw InvalidArgument("bins: must be >= 1");

  const auto times = io::tour_cpu_times(io::read_json(a.report));
  const auto cpu = fit_cpu_model(times);
  std::vector<io::PlanRow> rows;

  const auto [lo_it, hi_it] = std::minmax_element(times.begin(), times.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(a.bins);
  std::vector<double> counts(a.bins, 0.0);
  for (double t : times) {
    auto b = width > 0.0 ? static_cast<std::size_t>((t - lo) / width) : 0;
    counts[std::min(b, a.bins - 1)] += 1.0;
  }
  for (std::size_t b = 0; b < a.bins; ++b) {
    rows.push_back({"histogram", "count", lo + (static_cast<double>(b) + 0.5) * width, counts[b]});
  }

  // Same draw as replication 0 of the cost curves.
  Rng rng = Rng::stream(a.seed, 0);
  const auto sample = cpu.sample(a.k_extra, rng);
  for (auto p : a.pools) {
    const auto sim = simulate_pool(sample, p, a.longest_first);
    for (const auto& pt : sim.busy_curve) {
      rows.push_back({"busy", "pool=" + std::to_string(p), pt.time,
                      static_cast<double>(pt.active)});
    }
  }

  const auto curves = cost_curves(cpu, a.k_extra, a.pools, a.replications, a.seed,
                                  a.longest_first, effective_workers(a.workers));
  for (const auto& c : curves) {
    const auto x = static_cast<double>(c.pool_size);
    rows.push_back({"time_vs_workers", "mean", x, c.makespan_mean});
    rows.push_back({"time_vs_workers", "lo80", x, c.makespan_lo});
    rows.push_back({"time_vs_workers", "hi80", x, c.makespan_hi});
    rows.push_back({"cost_vs_workers", "hpc_mean", x, c.hpc_mean});
    rows.push_back({"cost_vs_workers", "hpc_lo80", x, c.hpc_lo});
    rows.push_back({"cost_vs_workers", "hpc_hi80", x, c.hpc_hi});
    rows.push_back({"cost_vs_workers", "cloud_mean", x, c.cloud_mean});
    rows.push_back({"cost_vs_workers", "cloud_lo80", x, c.cloud_lo});
    rows.push_back({"cost_vs_workers", "cloud_hi80", x, c.cloud_hi});
  }
  const fs::path path = fs::path(a.out) / "plan.csv";
  io::write_plan_csv(path, rows);

  out << "cpu model: threshold = " << cpu.threshold << ", tail shape = " << cpu.tail_shape
      << ", tail scale = " << cpu.tail_scale << '\n';
  out << std::setw(8) << "pool" << std::setw(16) << "makespan" << std::setw(16) << "hpc_cost"
      << std::setw(16) << "cloud_cost" << '\n';
  for (const auto& c : curves) {
    out << std::setw(8) << c.pool_size << std::setw(16) << c.makespan_mean << std::setw(16)
        << c.hpc_mean << std::setw(16) << c.cloud_mean << '\n';
  }
  out << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_index_sim(const IndexSimArgs& a, std::ostream& out) {
  if (a.n.size() != a.rho.size()) {
    throw InvalidArgument("N: need as many values as rho (configurations are paired)");
  }
  if (a.tours < 1) throw InvalidArgument("tours: must be >= 1");
  std::ostringstream csv;
  csv << std::setprecision(17) << "variant,N,rho,te_closed,te_mc,tau_mean\n";
  out << std::left << std::setw(8) << "variant" << std::setw(6) << "N" << std::setw(10) << "rho"
      << std::setw(14) << "te_closed" << std::setw(14) << "te_mc" << "tau_mean\n";
  for (std::size_t c = 0; c < a.n.size(); ++c) {
    if (a.n[c] < 1) throw InvalidArgument("N: must be >= 1");
    const auto chain = IdealIndexChain::equi_rejection(a.n[c], a.rho[c]);
    for (Variant v : {Variant::nrst, Variant::st}) {
      Rng rng = Rng::stream(a.seed, 2 * c + (v == Variant::st ? 1 : 0));
      const auto tours = simulate_index_tours(chain, v, a.tours, rng);
      std::vector<std::uint64_t> visits;
      visits.reserve(tours.size());
      double tau = 0.0;
      for (const auto& t : tours) {
        visits.push_back(t.visits_top);
        tau += static_cast<double>(t.tau);
      }
      tau /= static_cast<double>(tours.size());
      const double closed = ideal_te(chain, v);
      const double mc = estimate_te(visits);
      out << std::setw(8) << to_string(v) << std::setw(6) << a.n[c] << std::setw(10) << a.rho[c]
          << std::setw(14) << closed << std::setw(14) << mc << tau << '\n';
      csv << to_string(v) << ',' << a.n[c] << ',' << a.rho[c] << ',' << closed << ',' << mc << ','
          << tau << '\n';
    }
  }
  out << std::right;
  if (!a.out.empty()) {
    const fs::path path = fs::path(a.out) / "index_sim.csv";
    fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << csv.str();
  }
  return 0;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  RunConfig cfg = base_config(a.model, a.alpha, a.delta, a.seed, a.workers, a.out.empty() ? "." : a.out);
  if (a.replicates < 1) throw InvalidArgument("replicates: must be >= 1");

  io::ScheduleFile file;
  if (!a.schedule.empty()) {
    file = io::read_schedule(a.schedule);
    if (file.model && a.model.name == "toy_gaussian" && a.model.params.empty()) {
      cfg.model = *file.model;
    }
  }
  const auto model = make_model(cfg.model);
  if (a.schedule.empty()) {
    AdaptOptions opt;
    opt.initial_levels = a.levels;
    opt.workers = cfg.workers;
    Rng rng(cfg.seed);
    const auto result = adapt(*model, opt, rng);
    file.schedule = result.schedule;
    file.lambda_hat = result.barrier.total();
    IdealIndexChain chain{result.rejections.up, result.rejections.down};
    try {
      chain.validate();
      file.rejections = chain;
    } catch (const InvalidArgument&) {
    }
  }

  out << "model " << model->name() << ", N = " << file.schedule.top_level()
      << ", lambda_hat = " << file.lambda_hat << '\n';
  if (file.rejections) {
    out << "ideal index chain: TE nrst = " << ideal_te(*file.rejections, Variant::nrst)
        << ", TE st = " << ideal_te(*file.rejections, Variant::st) << '\n';
  }

  std::ostringstream csv;
  csv << "replicate,variant,k,te_hat,serial_cost,parallel_cost\n";
  std::size_t st_costlier = 0;
  out << std::setw(10) << "replicate" << std::setw(8) << "variant" << std::setw(10) << "K"
      << std::setw(14) << "te_hat" << std::setw(14) << "serial_cost" << std::setw(14)
      << "parallel_cost" << '\n';
  for (std::size_t r = 0; r < a.replicates; ++r) {
    std::uint64_t costs[2] = {0, 0};
    for (Variant v : {Variant::nrst, Variant::st}) {
      RunOptions opt;
      opt.variant = v;
      opt.alpha = cfg.alpha;
      opt.delta = cfg.delta;
      opt.workers = cfg.workers;
      opt.seed = Rng::stream(cfg.seed, r).next();
      opt.keep_traces = false;
      const auto rep = pilot_then_run(*model, file.schedule, file.lambda_hat, opt);
      costs[v == Variant::st ? 1 : 0] = rep.serial_cost;
      out << std::setw(10) << r << std::setw(8) << to_string(v) << std::setw(10) << rep.k()
          << std::setw(14) << rep.te_hat() << std::setw(14) << rep.serial_cost << std::setw(14)
          << rep.parallel_cost << '\n';
      csv << r << ',' << to_string(v) << ',' << rep.k() << ',' << rep.te_hat() << ','
          << rep.serial_cost << ',' << rep.parallel_cost << '\n';
    }
    if (costs[1] > costs[0]) ++st_costlier;
  }
  out << "st serial cost above nrst in " << st_costlier << " of " << a.replicates
      << " replicates\n";
  if (!a.out.empty()) {
    const fs::path path = fs::path(a.out) / "bench.csv";
    fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << csv.str();
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-reversible simulated tempering: tune, run, plan"};
  app.require_subcommand(1);
  std::string config;

  TuneArgs tune;
  auto* t = app.add_subcommand("tune", "Adapt grid, affinities and exploration steps");
  add_model_flags(*t, tune.model, true);
  t->add_option("--levels", tune.levels, "Initial number of levels N")->capture_default_str();
  t->add_option("--max-rounds", tune.max_rounds, "Adaptation rounds")->capture_default_str();
  t->add_option("--affinity", tune.affinity, "Affinity mode: mean or median")
      ->capture_default_str();
  t->add_option("--gamma", tune.gamma, "Grid size safety factor")->capture_default_str();
  t->add_option("--kappa-bar", tune.kappa_bar, "Autocorrelation target for exploration steps")
      ->capture_default_str();
  t->add_option("--seed", tune.seed)->capture_default_str();
  t->add_option("--workers", tune.workers, "Threads for NRPT exploration")->capture_default_str();
  t->add_option("--out", tune.out, "Output directory")->capture_default_str();
  t->add_flag("--no-restart", tune.no_restart, "Keep the initial number of levels");
  t->add_option("--config", config, "JSON file with default settings");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run regenerative tours on a tuned schedule");
  add_model_flags(*r, run.model, false);
  r->add_option("--schedule", run.schedule, "schedule.json from tune")->required();
  r->add_option("--alpha", run.alpha)->capture_default_str();
  r->add_option("--delta", run.delta)->capture_default_str();
  r->add_option("--te", run.te, "Run a fixed number of tours for this TE (skips the pilot)");
  r->add_option("--workers", run.workers, "Worker threads (0 = all cores)")->capture_default_str();
  r->add_option("--seed", run.seed)->capture_default_str();
  r->add_option("--variant", run.variant, "nrst or st")->capture_default_str();
  r->add_option("--out", run.out, "Output directory")->capture_default_str();
  r->add_option("--max-tour-steps", run.max_tour_steps)->capture_default_str();
  r->add_option("--config", config, "JSON file with default settings");

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "Pool-size planning from pilot CPU times");
  p->add_option("--report", plan.report, "report.json from run")->required();
  p->add_option("--k-extra", plan.k_extra, "Tours left to schedule")->capture_default_str();
  p->add_option("--pools", plan.pools, "Pool sizes")->capture_default_str();
  p->add_option("--replications", plan.replications)->capture_default_str();
  p->add_option("--bins", plan.bins, "Histogram bins")->capture_default_str();
  p->add_option("--seed", plan.seed)->capture_default_str();
  p->add_flag("--longest-first", plan.longest_first, "Dispatch longest tours first");
  p->add_option("--workers", plan.workers)->capture_default_str();
  p->add_option("--out", plan.out, "Output directory")->capture_default_str();
  p->add_option("--config", config, "JSON file with default settings");

  IndexSimArgs isim;
  auto* s = app.add_subcommand("index-sim", "Ideal index chains: closed-form vs simulated TE");
  s->add_option("--N", isim.n, "Numbers of levels")->capture_default_str();
  s->add_option("--rho", isim.rho, "Rejection probability per level")->capture_default_str();
  s->add_option("--tours", isim.tours)->capture_default_str();
  s->add_option("--seed", isim.seed)->capture_default_str();
  s->add_option("--out", isim.out, "Directory for index_sim.csv");
  s->add_option("--config", config, "JSON file with default settings");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Serial cost of NRST vs ST at equal CI width");
  add_model_flags(*b, bench.model, true);
  b->add_option("--schedule", bench.schedule, "schedule.json (tuned in-process when absent)");
  b->add_option("--replicates", bench.replicates)->capture_default_str();
  b->add_option("--levels", bench.levels, "Initial levels when tuning")->capture_default_str();
  b->add_option("--alpha", bench.alpha)->capture_default_str();
  b->add_option("--delta", bench.delta)->capture_default_str();
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--workers", bench.workers)->capture_default_str();
  b->add_option("--out", bench.out, "Directory for bench.csv");
  b->add_option("--config", config, "JSON file with default settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config.empty()) apply_config(*sub, config);
    if (sub == t) return cmd_tune(tune, out);
    if (sub == r) return cmd_run(run, out);
    if (sub == p) return cmd_plan(plan, out);
    if (sub == s) return cmd_index_sim(isim, out);
    return cmd_bench(bench, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nrst
