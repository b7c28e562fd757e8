#pragma once

#include <cstdint>

namespace xdrive::nn {

// Counter-based generator: draw i is a pure hash of (key, i), so streams are
// reproducible on every platform and can be split without shared state.
// Distributions are computed here rather than via <random> because the
// standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace xdrive::nn
