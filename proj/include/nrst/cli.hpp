#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nrst/adapt.hpp"
#include "nrst/bench_models.hpp"

namespace nrst {

/// Settings shared by the pipeline subcommands.
struct RunConfig {
  ModelSpec model{"toy_gaussian", {}, 1};
  AffinityMode affinity_mode = AffinityMode::mean_energy;
  double gamma = 2.0;
  double kappa_bar = 0.95;
  double alpha = 0.95;
  double delta = 0.5;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output_dir = ".";

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;
};

/// Worker count after applying the NRST_THREADS cap.
unsigned effective_workers(unsigned requested);

/// Entry point of the `nrst` tool. Exit codes: 0 success, 1 configuration
/// error, 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nrst
