#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nrst {

/// Pseudo-random stream used by every sampler in the library.
///
/// Independent streams are derived from a master seed and a stream index
/// (tour index, chain index, replication index), so results never depend on
/// which worker thread happened to execute a unit of work.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0);

  /// Stream keyed by (seed, stream_id). Distinct keys give unrelated streams.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential() { return -std::log(uniform()); }

  /// Gamma with the given shape and scale.
  double gamma(double shape, double scale);

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n);

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace nrst
