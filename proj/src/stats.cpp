#include "nrst/stats.hpp"

#include <algorithm>
#include <cmath>

#include "nrst/errors.hpp"

namespace nrst {

std::uint64_t TourStatistics::total_visits() const {
  std::uint64_t total = 0;
  for (const auto& t : tours) total += t.visits_top;
  return total;
}

std::vector<std::uint64_t> TourStatistics::visit_counts() const {
  std::vector<std::uint64_t> v;
  v.reserve(tours.size());
  for (const auto& t : tours) v.push_back(t.visits_top);
  return v;
}

void TourStatistics::validate() const {
  if (tours.empty()) throw InvalidArgument("tour statistics need k >= 1");
  for (const auto& t : tours) {
    if (t.tau < 1) throw InvalidArgument("tour length must be >= 1");
    if (t.top_sums.size() != num_functions) {
      throw InvalidArgument("tour record has the wrong number of test-function sums");
    }
  }
}

TourStatistics TourStatistics::from_traces(std::span<const TourTrace> traces,
                                           std::size_t num_functions) {
  TourStatistics stats;
  stats.num_functions = num_functions;
  stats.tours.reserve(traces.size());
  for (const auto& trace : traces) {
    TourRecord rec;
    rec.tau = trace.tau();
    rec.visits_top = trace.visits_top;
    rec.top_sums.assign(num_functions, 0.0);
    for (const auto& step : trace.steps) {
      if (step.h.empty()) continue;
      for (std::size_t j = 0; j < num_functions; ++j) rec.top_sums[j] += step.h[j];
    }
    stats.tours.push_back(std::move(rec));
  }
  return stats;
}

double ratio_estimate(const TourStatistics& stats, std::size_t h_index) {
  stats.validate();
  if (h_index >= stats.num_functions) throw InvalidArgument("test function index out of range");
  const std::uint64_t visits = stats.total_visits();
  if (visits == 0) throw NoTopVisits();
  double num = 0.0;
  for (const auto& t : stats.tours) num += t.top_sums[h_index];
  return num / static_cast<double>(visits);
}

double estimate_sigma2(const TourStatistics& stats, std::size_t h_index) {
  const double r = ratio_estimate(stats, h_index);
  double sum_sq = 0.0;
  for (const auto& t : stats.tours) {
    const double centered = t.top_sums[h_index] - r * static_cast<double>(t.visits_top);
    sum_sq += centered * centered;
  }
  const auto visits = static_cast<double>(stats.total_visits());
  return static_cast<double>(stats.size()) * sum_sq / (visits * visits);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double z_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  return normal_quantile(0.5 * (1.0 + alpha));
}

Interval confidence_interval(double estimate, double sigma2, std::uint64_t k, double alpha) {
  if (k < 1) throw InvalidArgument("confidence_interval: k must be >= 1");
  if (!(sigma2 >= 0.0)) throw InvalidArgument("confidence_interval: sigma2 must be >= 0");
  const double half = z_alpha(alpha) * std::sqrt(sigma2 / static_cast<double>(k));
  return {estimate - half, estimate + half};
}

double estimate_te(std::span<const std::uint64_t> visit_counts) {
  if (visit_counts.empty()) throw InvalidArgument("estimate_te needs at least one tour");
  unsigned __int128 sum = 0;
  unsigned __int128 sum_sq = 0;
  for (std::uint64_t v : visit_counts) {
    sum += v;
    sum_sq += static_cast<unsigned __int128>(v) * v;
  }
  if (sum == 0) return 0.0;
  const unsigned __int128 num = sum * sum;
  const unsigned __int128 den = sum_sq * visit_counts.size();
  if (num == den) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::uint64_t min_tours(double alpha, double delta, double te) {
  if (!(delta > 0.0)) throw InvalidArgument("min_tours: delta must be positive");
  if (!(te > 0.0 && te <= 1.0)) throw InvalidArgument("min_tours: te must lie in (0,1]");
  const double z = z_alpha(alpha);
  const double k = std::ceil((4.0 / te) * (z / delta) * (z / delta));
  return static_cast<std::uint64_t>(std::max(1.0, k));
}

Diagnostics summarize(const TourStatistics& stats, std::span<const std::string> names,
                      double alpha) {
  stats.validate();
  if (names.size() != stats.num_functions) {
    throw InvalidArgument("summarize: one name per test function required");
  }
  Diagnostics d;
  d.k = stats.size();
  d.alpha = alpha;
  const auto visits = stats.visit_counts();
  d.te_hat = estimate_te(visits);
  if (stats.total_visits() == 0) return d;
  for (std::size_t j = 0; j < stats.num_functions; ++j) {
    FunctionEstimate fe;
    fe.name = names[j];
    fe.estimate = ratio_estimate(stats, j);
    fe.sigma2 = estimate_sigma2(stats, j);
    fe.ci = confidence_interval(fe.estimate, fe.sigma2, d.k, alpha);
    d.functions.push_back(std::move(fe));
  }
  return d;
}

}  // namespace nrst
