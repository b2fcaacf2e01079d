#include "nrst/io.hpp"

#include <fstream>
#include <iomanip>

#include "nrst/errors.hpp"

namespace nrst::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

// JSON has no infinity; encode it as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const ModelSpec& spec) {
  json params = json::object();
  for (const auto& [k, v] : spec.params) params[k] = v;
  return {{"name", spec.name}, {"params", params}, {"data_seed", spec.data_seed}};
}

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
    return spec;
  }
  if (!j.is_object() || !j.contains("name")) {
    throw InvalidArgument("model: expected a name or an object with a 'name' field");
  }
  spec.name = j.at("name").get<std::string>();
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) {
      if (!v.is_number()) throw InvalidArgument("model.params." + k + ": expected a number");
      spec.params[k] = v.get<double>();
    }
  }
  if (j.contains("data_seed")) spec.data_seed = j.at("data_seed").get<std::uint64_t>();
  return spec;
}

json to_json(const Schedule& s) {
  return {{"betas", s.betas}, {"affinities", s.affinities}, {"explore_steps", s.explore_steps}};
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  try {
    s.betas = j.at("betas").get<std::vector<double>>();
    s.affinities = j.at("affinities").get<std::vector<double>>();
    s.explore_steps = j.at("explore_steps").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("schedule: ") + e.what());
  }
  s.validate();
  return s;
}

json schedule_document(const AdaptResult& result, const ModelSpec& spec) {
  json doc = to_json(result.schedule);
  doc["lambda_hat"] = result.barrier.total();
  doc["converged"] = result.converged;
  doc["restarted"] = result.restarted;
  doc["n_scan"] = result.n_scan;
  doc["log_z"] = result.log_z;
  doc["model"] = to_json(spec);
  doc["rejections"] = {{"up", result.rejections.up},
                       {"down", result.rejections.down},
                       {"sym", result.rejections.sym}};
  json rounds = json::array();
  for (const auto& r : result.rounds) {
    rounds.push_back({{"round", r.round},
                      {"n_levels", r.n_levels},
                      {"n_scan", r.n_scan},
                      {"lambda_hat", r.lambda_hat},
                      {"affinity_top", r.affinity_top},
                      {"converged", r.indicators.converged},
                      {"rejection_spread", number(r.indicators.rejection_spread)},
                      {"affinity_change", number(r.indicators.affinity_change)},
                      {"barrier_change", number(r.indicators.barrier_change)},
                      {"direction_asymmetry", number(r.indicators.direction_asymmetry)}});
  }
  doc["rounds"] = rounds;
  return doc;
}

ScheduleFile read_schedule(const std::filesystem::path& path) {
  const json j = read_json(path);
  ScheduleFile f;
  f.schedule = schedule_from_json(j);
  f.lambda_hat = j.value("lambda_hat", 0.0);
  f.converged = j.value("converged", false);
  if (j.contains("model")) f.model = model_spec_from_json(j.at("model"));
  if (j.contains("rejections")) {
    IdealIndexChain chain{j.at("rejections").value("up", std::vector<double>{}),
                          j.at("rejections").value("down", std::vector<double>{})};
    try {
      chain.validate();
      f.rejections = std::move(chain);
    } catch (const InvalidArgument&) {
    }
  }
  return f;
}

json report_document(const RunReport& report) {
  json doc;
  doc["variant"] = to_string(report.variant);
  doc["seed"] = report.seed;
  doc["alpha"] = report.alpha;
  doc["delta"] = report.delta;
  doc["k"] = report.k();
  doc["k_trial"] = report.k_trial;
  doc["k_extra"] = report.k_extra;
  doc["te_input"] = report.te_input;
  doc["te_hat"] = report.te_hat();
  doc["serial_cost"] = report.serial_cost;
  doc["parallel_cost"] = report.parallel_cost;
  doc["wall_seconds"] = report.wall_seconds;
  json fns = json::array();
  for (const auto& f : report.diagnostics.functions) {
    fns.push_back({{"name", f.name},
                   {"estimate", number(f.estimate)},
                   {"sigma2", number(f.sigma2)},
                   {"ci", {number(f.ci.lo), number(f.ci.hi)}}});
  }
  doc["functions"] = fns;
  json tours = json::array();
  for (const auto& t : report.tours) {
    tours.push_back({{"index", t.index},
                     {"tau", t.tau},
                     {"visits_top", t.visits_top},
                     {"v_evals", t.v_evals},
                     {"cpu_seconds", t.cpu_seconds}});
  }
  doc["tours"] = tours;
  return doc;
}

std::vector<double> tour_cpu_times(const json& report) {
  if (!report.contains("tours") || !report.at("tours").is_array()) {
    throw InvalidArgument("report: missing 'tours' array");
  }
  std::vector<double> times;
  for (const auto& t : report.at("tours")) times.push_back(t.at("cpu_seconds").get<double>());
  return times;
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_traces_csv(const std::filesystem::path& path, std::span<const TourTrace> traces) {
  auto out = open_out(path);
  out << "tour_id,step,level,direction,v\n";
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& steps = traces[k].steps;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      out << k << ',' << s << ',' << steps[s].level << ',' << steps[s].direction << ','
          << steps[s].v << '\n';
    }
  }
}

void write_barrier_csv(const std::filesystem::path& path, const BarrierEstimate& barrier,
                       std::size_t curve_points) {
  auto out = open_out(path);
  out << "kind,beta,lambda\n";
  for (std::size_t i = 0; i < barrier.betas().size(); ++i) {
    out << "knot," << barrier.betas()[i] << ',' << barrier.values()[i] << '\n';
  }
  for (std::size_t i = 0; i < curve_points && curve_points > 1; ++i) {
    const double b = static_cast<double>(i) / static_cast<double>(curve_points - 1);
    out << "curve," << b << ',' << barrier(b) << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < data.columns.size(); ++j) {
    out << (j ? "," : "") << data.columns[j];
  }
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
}

void write_plan_csv(const std::filesystem::path& path, std::span<const PlanRow> rows) {
  auto out = open_out(path);
  out << "panel,series,x,y\n";
  for (const auto& r : rows) out << r.panel << ',' << r.series << ',' << r.x << ',' << r.y << '\n';
}

}  // namespace nrst::io
