#include "nrst/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nrst/errors.hpp"

namespace nrst {

std::vector<TestFunction> TemperedModel::test_functions() const {
  std::vector<TestFunction> out;
  out.reserve(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    out.push_back({"x" + std::to_string(j + 1), [j](std::span<const double> x) { return x[j]; }});
  }
  return out;
}

double PotentialEvaluator::operator()(std::span<const double> x) {
  ++count_;
  const double v = model_->potential(x);
  if (std::isnan(v) || v == -std::numeric_limits<double>::infinity() ||
      (std::isinf(v) && !model_->potential_may_be_infinite())) {
    throw DivergedPotential(Point(x.begin(), x.end()), v);
  }
  return v;
}

void Schedule::validate() const {
  const std::size_t n = betas.size();
  if (n < 2) throw InvalidArgument("schedule needs at least two grid points");
  if (affinities.size() != n) throw InvalidArgument("affinities and betas differ in length");
  if (explore_steps.size() != n - 1) throw InvalidArgument("explore_steps must have N entries");
  if (betas.front() != 0.0 || betas.back() != 1.0) {
    throw InvalidArgument("grid must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(betas[i] > betas[i - 1])) throw InvalidArgument("grid must be strictly increasing");
  }
  for (double c : affinities) {
    if (!std::isfinite(c)) throw InvalidArgument("affinities must be finite");
  }
  for (int s : explore_steps) {
    if (s < 1) throw InvalidArgument("explore_steps must be positive");
  }
}

Schedule Schedule::uniform(std::size_t n_levels) {
  if (n_levels < 1) throw InvalidArgument("grid needs N >= 1");
  Schedule s;
  s.betas.resize(n_levels + 1);
  for (std::size_t i = 0; i <= n_levels; ++i) {
    s.betas[i] = static_cast<double>(i) / static_cast<double>(n_levels);
  }
  s.betas.back() = 1.0;
  s.affinities.assign(n_levels + 1, 0.0);
  s.explore_steps.assign(n_levels, 1);
  return s;
}

double acceptance_probability(double v, double beta_from, double beta_to, double c_from,
                              double c_to) {
  if (!std::isfinite(v) || !std::isfinite(beta_from) || !std::isfinite(beta_to) ||
      !std::isfinite(c_from) || !std::isfinite(c_to)) {
    throw InvalidArgument("acceptance_probability: non-finite input");
  }
  const double exponent = (beta_to - beta_from) * v - (c_to - c_from);
  return std::exp(-std::max(0.0, exponent));
}

double tempering_acceptance(double v, double beta_from, double beta_to, double c_from,
                            double c_to) {
  if (v == std::numeric_limits<double>::infinity()) {
    return beta_to > beta_from ? 0.0 : 1.0;
  }
  return acceptance_probability(v, beta_from, beta_to, c_from, c_to);
}

double log_tempered_density(PotentialEvaluator& eval, std::span<const double> x, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0, 1]");
  const double lr = eval.model().log_reference(x);
  if (beta == 0.0) return lr;
  if (lr == -std::numeric_limits<double>::infinity()) return lr;
  const double v = eval(x);
  if (std::isinf(v)) return -std::numeric_limits<double>::infinity();
  return lr - beta * v;
}

double log_tempered_density(const TemperedModel& model, std::span<const double> x, double beta) {
  PotentialEvaluator eval(model);
  return log_tempered_density(eval, x, beta);
}

std::vector<double> pseudo_prior(std::span<const double> log_z, std::span<const double> affinities) {
  if (log_z.empty() || log_z.size() != affinities.size()) {
    throw InvalidArgument("pseudo_prior: inputs must have equal, positive length");
  }
  std::vector<double> p(log_z.size());
  double max_exp = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = log_z[i] + affinities[i];
    max_exp = std::max(max_exp, p[i]);
  }
  if (!std::isfinite(max_exp)) throw InvalidArgument("pseudo_prior: non-finite exponents");
  double total = 0.0;
  for (double& pi : p) {
    pi = std::exp(pi - max_exp);
    total += pi;
  }
  for (double& pi : p) pi /= total;
  return p;
}

}  // namespace nrst
