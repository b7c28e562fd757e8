#pragma once

#include <cstdint>
#include <filesystem>

#include "xdrive/nn/adam.hpp"
#include "xdrive/nn/dense.hpp"
#include "xdrive/nn/rng.hpp"
#include "xdrive/rl/noise.hpp"
#include "xdrive/rl/replay_buffer.hpp"
#include "xdrive/sim/env.hpp"

namespace xdrive::rl {

struct Hyperparams {
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.001;
  std::size_t buffer_capacity = 100000;
  std::size_t batch_size = 32;
  double gamma = 0.99;
  int episodes = 500;
  int warmup_steps = 1000;
  int hidden = 64;
  double reward_scale = 0.01;  // applied to rewards before they enter the buffer
  bool random_warmup = true;  // uniform random actions until warmup_steps
  double preactivation_penalty = 0.05;  // weight on mean squared pre-tanh actor output
  double random_start = 0.5;  // share of episodes started at a uniform route position
  double random_start_speed = 5.0;  // upper bound of the uniform start speed for those
  NoiseConfig noise;

  void validate() const;
};

// theta' <- tau theta + (1 - tau) theta', elementwise over matching lists.
template <typename Scalar>
void soft_update(const nn::ParamList<Scalar>& online, const nn::ParamList<Scalar>& target, double tau) {
  nn::check_same_layout(online, target);
  const auto t = static_cast<Scalar>(tau);
  for (std::size_t i = 0; i < online.size(); ++i) {
    // incremental form: leaves theta' bit-identical when it already equals theta
    auto tgt = target[i].map();
    tgt += t * (online[i].map() - tgt);
  }
}

template <typename Scalar>
void hard_update(const nn::ParamList<Scalar>& online, const nn::ParamList<Scalar>& target) {
  nn::check_same_layout(online, target);
  for (std::size_t i = 0; i < online.size(); ++i) target[i].map() = online[i].map();
}

// Online and target copy of one network.
struct TargetPair {
  nn::Mlp<float> online;
  nn::Mlp<float> target;

  nn::ParamList<float> online_params(const std::string& prefix);
  nn::ParamList<float> target_params(const std::string& prefix);
  void soft_update(double tau);
};

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) over the batch
};

class DdpgAgent {
 public:
  DdpgAgent(nn::Index obs_dim, nn::Index action_dim, Hyperparams hp, std::uint64_t seed);

  nn::Index obs_dim() const { return obs_dim_; }
  nn::Index action_dim() const { return action_dim_; }
  const Hyperparams& hyperparams() const { return hp_; }

  // Deterministic mu(s).
  nn::VectorD policy(const nn::VectorD& obs) const;
  // clamp(mu(s) + N_t, -1, 1) when exploring, mu(s) otherwise.
  nn::VectorD select_action(const nn::VectorD& obs, ActionNoise& noise, bool explore) const;

  // Critic regression target r + gamma (1 - done) Q'(s', mu'(s')).
  nn::MatrixF bellman_target(const Batch& batch) const;
  TrainStats train_step(ReplayBuffer& buffer);
  TrainStats train_on(const Batch& batch);

  TargetPair& actor() { return actor_; }
  TargetPair& critic() { return critic_; }
  const TargetPair& actor() const { return actor_; }
  const TargetPair& critic() const { return critic_; }

  // Online and target nets of both actor and critic.
  nn::ParamList<float> parameters();
  void save(const std::filesystem::path& path);
  void load(const std::filesystem::path& path);

 private:
  nn::Index obs_dim_;
  nn::Index action_dim_;
  Hyperparams hp_;
  TargetPair actor_;
  TargetPair critic_;
  nn::Mlp<float> actor_grad_;
  nn::Mlp<float> critic_grad_;
  nn::Adam<float> actor_opt_;
  nn::Adam<float> critic_opt_;
};

sim::Action to_action(const nn::VectorD& a);

}  // namespace xdrive::rl
