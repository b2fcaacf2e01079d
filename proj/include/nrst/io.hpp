#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "nrst/adapt.hpp"
#include "nrst/bench_models.hpp"
#include "nrst/planner.hpp"
#include "nrst/runner.hpp"

namespace nrst::io {

using nlohmann::json;

json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j);

json to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);

/// Schedule file written by `tune`.
struct ScheduleFile {
  Schedule schedule;
  double lambda_hat = 0.0;
  bool converged = false;
  std::optional<ModelSpec> model;
  std::optional<IdealIndexChain> rejections;  // when present and all < 1
};

json schedule_document(const AdaptResult& result, const ModelSpec& spec);
ScheduleFile read_schedule(const std::filesystem::path& path);

json report_document(const RunReport& report);

/// Per-tour CPU times from a report document.
std::vector<double> tour_cpu_times(const json& report);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// tour_id,step,level,direction,v with round-trip precision.
void write_traces_csv(const std::filesystem::path& path, std::span<const TourTrace> traces);

/// Knots plus a dense curve of the interpolated barrier.
void write_barrier_csv(const std::filesystem::path& path, const BarrierEstimate& barrier,
                       std::size_t curve_points = 201);

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

/// Tidy rows (panel, series, x, y).
struct PlanRow {
  std::string panel;
  std::string series;
  double x = 0.0;
  double y = 0.0;
};

void write_plan_csv(const std::filesystem::path& path, std::span<const PlanRow> rows);

}  // namespace nrst::io
