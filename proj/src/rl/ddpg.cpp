#include "xdrive/rl/ddpg.hpp"

#include <algorithm>

#include "xdrive/errors.hpp"
#include "xdrive/nn/checkpoint.hpp"
#include "xdrive/nn/init.hpp"

namespace xdrive::rl {

void Hyperparams::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidConfig("tau must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidConfig("gamma must lie in (0, 1]");
  if (batch_size == 0 || buffer_capacity < batch_size) throw InvalidConfig("buffer capacity must be >= batch size > 0");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw InvalidConfig("learning rates must be positive");
  if (episodes < 0 || warmup_steps < 0 || hidden <= 0) throw InvalidConfig("episodes, warmup and hidden must be >= 0");
}

nn::ParamList<float> TargetPair::online_params(const std::string& prefix) {
  nn::ParamList<float> out;
  online.collect(out, prefix);
  return out;
}

nn::ParamList<float> TargetPair::target_params(const std::string& prefix) {
  nn::ParamList<float> out;
  target.collect(out, prefix + "_target");
  return out;
}

void TargetPair::soft_update(double tau) { rl::soft_update(online_params("n"), target_params("n"), tau); }

namespace {

// Small final layer so the initial policy and value start near zero.
void shrink_last(nn::Mlp<float>& net, nn::Rng& rng) {
  auto& last = net.layers.back();
  nn::fill_uniform(last.weight, 3e-3, rng);
  nn::fill_uniform(last.bias, 3e-3, rng);
}

nn::MatrixF stack(const nn::MatrixF& top, const nn::MatrixF& bottom) {
  nn::MatrixF out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

DdpgAgent::DdpgAgent(nn::Index obs_dim, nn::Index action_dim, Hyperparams hp, std::uint64_t seed)
    : obs_dim_(obs_dim), action_dim_(action_dim), hp_(hp) {
  hp_.validate();
  if (obs_dim <= 0 || action_dim <= 0) throw InvalidConfig("agent dimensions must be positive");
  const nn::Index h = hp_.hidden;
  nn::Rng rng(seed, 0xdd9);
  actor_.online = nn::make_mlp<float>({obs_dim, h, h, action_dim}, nn::Activation::relu, nn::Activation::tanh);
  critic_.online = nn::make_mlp<float>({obs_dim + action_dim, h, h, 1}, nn::Activation::relu, nn::Activation::identity);
  nn::initialize(actor_.online, rng);
  nn::initialize(critic_.online, rng);
  shrink_last(actor_.online, rng);
  shrink_last(critic_.online, rng);
  actor_.target = actor_.online;
  critic_.target = critic_.online;
  actor_grad_ = nn::zeros_like(actor_.online);
  critic_grad_ = nn::zeros_like(critic_.online);
  actor_opt_ = nn::Adam<float>(actor_.online_params("actor"), {.lr = hp_.actor_lr});
  critic_opt_ = nn::Adam<float>(critic_.online_params("critic"), {.lr = hp_.critic_lr});
}

nn::VectorD DdpgAgent::policy(const nn::VectorD& obs) const {
  nn::expect_rows(obs.rows(), obs_dim_, "actor input");
  const nn::MatrixF x = obs.cast<float>();
  return nn::forward(actor_.online, x).col(0).cast<double>();
}

nn::VectorD DdpgAgent::select_action(const nn::VectorD& obs, ActionNoise& noise, bool explore) const {
  nn::VectorD a = policy(obs);
  if (explore) a = (a + noise.sample()).cwiseMax(-1.0).cwiseMin(1.0);
  return a;
}

nn::MatrixF DdpgAgent::bellman_target(const Batch& batch) const {
  const nn::MatrixF a_next = nn::forward(actor_.target, batch.s_next);
  const nn::MatrixF q_next = nn::forward(critic_.target, stack(batch.s_next, a_next));
  const auto g = static_cast<float>(hp_.gamma);
  return batch.r.array() + g * (1.0f - batch.done.array()) * q_next.array();
}

TrainStats DdpgAgent::train_step(ReplayBuffer& buffer) { return train_on(buffer.sample(hp_.batch_size)); }

TrainStats DdpgAgent::train_on(const Batch& batch) {
  nn::expect_rows(batch.s.rows(), obs_dim_, "batch state");
  nn::expect_rows(batch.a.rows(), action_dim_, "batch action");
  const auto n = static_cast<float>(batch.s.cols());
  TrainStats stats;

  // critic: mean squared Bellman error
  const nn::MatrixF y = bellman_target(batch);
  nn::MlpTrace<float> ct;
  const nn::MatrixF q = nn::forward(critic_.online, stack(batch.s, batch.a), &ct);
  const nn::MatrixF err = q - y;
  stats.critic_loss = err.squaredNorm() / n;
  auto critic_params = critic_.online_params("critic");
  nn::ParamList<float> critic_grads;
  critic_grad_.collect(critic_grads, "critic");
  nn::fill_zero(critic_grads);
  nn::backward(critic_.online, ct, nn::MatrixF(2.0f / n * err), critic_grad_);
  critic_opt_.step(critic_params, critic_grads);

  // actor: ascend mean Q(s, mu(s)); the critic gradient from this pass is discarded
  nn::MlpTrace<float> at, qt;
  const nn::MatrixF a_pi = nn::forward(actor_.online, batch.s, &at);
  const nn::MatrixF q_pi = nn::forward(critic_.online, stack(batch.s, a_pi), &qt);
  stats.actor_objective = q_pi.mean();
  nn::fill_zero(critic_grads);
  const nn::MatrixF dq = nn::MatrixF::Constant(1, q_pi.cols(), -1.0f / n);
  const nn::MatrixF dinput = nn::backward(critic_.online, qt, dq, critic_grad_);
  auto actor_params = actor_.online_params("actor");
  nn::ParamList<float> actor_grads;
  actor_grad_.collect(actor_grads, "actor");
  nn::fill_zero(actor_grads);
  if (hp_.preactivation_penalty > 0.0) {
    // d/dz of lambda * mean(z^2) added after the tanh derivative, z = atanh(a)
    const auto& last = actor_.online.layers.back();
    const nn::MatrixF& h = at.activations[at.activations.size() - 2];
    nn::MatrixF z = last.weight * h;
    z.colwise() += last.bias;
    const nn::MatrixF da = dinput.bottomRows(action_dim_);
    const nn::MatrixF dz = (da.array() * (1.0f - a_pi.array().square())).matrix() +
                           static_cast<float>(2.0 * hp_.preactivation_penalty) / n * z;
    nn::Dense<float> linear = last;
    linear.activation = nn::Activation::identity;
    nn::MatrixF g = nn::backward(linear, h, z, dz, actor_grad_.layers.back());
    for (std::size_t i = actor_.online.layers.size() - 1; i-- > 0;)
      g = nn::backward(actor_.online.layers[i], at.activations[i], at.activations[i + 1], g, actor_grad_.layers[i]);
  } else {
    nn::backward(actor_.online, at, nn::MatrixF(dinput.bottomRows(action_dim_)), actor_grad_);
  }
  actor_opt_.step(actor_params, actor_grads);

  actor_.soft_update(hp_.tau);
  critic_.soft_update(hp_.tau);
  return stats;
}

nn::ParamList<float> DdpgAgent::parameters() {
  nn::ParamList<float> out = actor_.online_params("actor");
  for (auto& p : actor_.target_params("actor")) out.push_back(p);
  for (auto& p : critic_.online_params("critic")) out.push_back(p);
  for (auto& p : critic_.target_params("critic")) out.push_back(p);
  return out;
}

void DdpgAgent::save(const std::filesystem::path& path) { nn::save_parameters(path, parameters()); }

void DdpgAgent::load(const std::filesystem::path& path) { nn::load_parameters(path, parameters()); }

sim::Action to_action(const nn::VectorD& a) {
  if (a.size() != 2) throw ShapeMismatch("action vector must have 2 entries");
  return sim::Action{a(0), a(1)}.clamped();
}

}  // namespace xdrive::rl
