#include "xdrive/rl/noise.hpp"

#include <algorithm>

#include "xdrive/errors.hpp"

namespace xdrive::rl {

double sigma_at(const NoiseConfig& cfg, int episode, int episodes) {
  if (episodes <= 1) return cfg.sigma_start;
  const double f = std::clamp(static_cast<double>(episode) / (episodes - 1), 0.0, 1.0);
  return cfg.sigma_start + (cfg.sigma_end - cfg.sigma_start) * f;
}

ActionNoise::ActionNoise(NoiseConfig cfg, nn::Index dim, nn::Rng rng)
    : cfg_(cfg), sigma_(cfg.sigma_start), state_(nn::VectorD::Zero(dim)), rng_(rng) {
  if (dim <= 0) throw InvalidConfig("noise dimension must be positive");
}

void ActionNoise::reset() { state_.setZero(); }

nn::VectorD ActionNoise::sample() {
  nn::VectorD eps(state_.size());
  for (nn::Index i = 0; i < eps.size(); ++i) eps(i) = rng_.normal();
  if (cfg_.kind == NoiseKind::gaussian) return sigma_ * eps;
  state_ += -cfg_.theta * state_ + sigma_ * eps;
  return state_;
}

}  // namespace xdrive::rl
