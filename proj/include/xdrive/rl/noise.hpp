#pragma once

#include "xdrive/nn/rng.hpp"
#include "xdrive/nn/tensor.hpp"

namespace xdrive::rl {

enum class NoiseKind { gaussian, ornstein_uhlenbeck };

struct NoiseConfig {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma_start = 0.3;
  double sigma_end = 0.05;
  double theta = 0.15;  // OU mean reversion per step
};

// Linear decay from sigma_start (first episode) to sigma_end (last).
double sigma_at(const NoiseConfig& cfg, int episode, int episodes);

class ActionNoise {
 public:
  ActionNoise(NoiseConfig cfg, nn::Index dim, nn::Rng rng);

  void set_sigma(double sigma) { sigma_ = sigma; }
  double sigma() const { return sigma_; }
  // Clears OU state; a no-op for Gaussian noise.
  void reset();
  nn::VectorD sample();

 private:
  NoiseConfig cfg_;
  double sigma_;
  nn::VectorD state_;
  nn::Rng rng_;
};

}  // namespace xdrive::rl
