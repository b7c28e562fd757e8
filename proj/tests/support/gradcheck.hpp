#pragma once

// Finite-difference checks shared by the unit tests and the acceptance run.
// Every check works in double precision with central differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "xdrive/nn/conv2d.hpp"
#include "xdrive/nn/dense.hpp"
#include "xdrive/nn/dropout.hpp"
#include "xdrive/nn/embedding.hpp"
#include "xdrive/nn/init.hpp"
#include "xdrive/nn/lstm.hpp"
#include "xdrive/nn/softmax.hpp"

namespace xdrive::testing {

using nn::Index;
using nn::MatrixD;

inline constexpr double kStep = 1e-5;

// |a - n| / max(|a|, |n|, floor): relative, except that gradients much
// smaller than the floor are compared in absolute terms.
inline double rel_error(double analytic, double numeric, double floor = 1e-4) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Perturbs x[i] in place and compares (L(x+h) - L(x-h)) / 2h with analytic[i].
inline double check_entries(double* x, const double* analytic, Index n, const std::function<double()>& loss) {
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double orig = x[i];
    x[i] = orig + kStep;
    const double up = loss();
    x[i] = orig - kStep;
    const double down = loss();
    x[i] = orig;
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2 * kStep)));
  }
  return worst;
}

inline double check_params(const nn::ParamList<double>& params, const nn::ParamList<double>& grads,
                           const std::function<double()>& loss) {
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k)
    worst = std::max(worst, check_entries(params[k].data, grads[k].data, params[k].size(), loss));
  return worst;
}

inline MatrixD random_matrix(Index rows, Index cols, nn::Rng& rng, double scale = 1.0) {
  MatrixD m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, scale);
  return m;
}

inline double weighted_sum(const MatrixD& y, const MatrixD& r) { return (y.array() * r.array()).sum(); }

inline Index pick(nn::Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// ReLU is not differentiable at 0; keep sampled pre-activations away from it.
inline bool clear_of_kink(const MatrixD& z, nn::Activation a) {
  return a != nn::Activation::relu || z.cwiseAbs().minCoeff() > 1e-3;
}

inline double dense_trial(nn::Rng& rng) {
  const nn::Activation acts[] = {nn::Activation::identity, nn::Activation::relu, nn::Activation::tanh,
                                 nn::Activation::sigmoid};
  const auto act = acts[rng.below(4)];
  nn::Dense<double> layer(pick(rng, 1, 6), pick(rng, 1, 6), act);
  const Index batch = pick(rng, 1, 4);
  MatrixD x;
  do {
    layer.weight = random_matrix(layer.outputs(), layer.inputs(), rng, 0.7);
    layer.bias = random_matrix(layer.outputs(), 1, rng, 0.3);
    x = random_matrix(layer.inputs(), batch, rng);
  } while (!clear_of_kink(layer.weight * x + layer.bias.replicate(1, batch), act));
  const MatrixD r = random_matrix(layer.outputs(), batch, rng);
  const MatrixD y = nn::forward(layer, x);
  auto grad = nn::zeros_like(layer);
  MatrixD dx = nn::backward(layer, x, y, r, grad);
  auto loss = [&] { return weighted_sum(nn::forward(layer, x), r); };
  nn::ParamList<double> p, g;
  layer.collect(p, "d");
  grad.collect(g, "d");
  return std::max(check_entries(x.data(), dx.data(), x.size(), loss), check_params(p, g, loss));
}

inline double conv_trial(nn::Rng& rng) {
  const nn::Activation acts[] = {nn::Activation::identity, nn::Activation::relu, nn::Activation::tanh};
  const auto act = acts[rng.below(3)];
  const Index k = rng.below(2) ? 3 : 1;
  const auto pad = rng.below(2) ? nn::Padding::same : nn::Padding::valid;
  nn::Conv2d<double> c(pick(rng, 1, 3), pick(rng, 3, 7), pick(rng, 3, 7), pick(rng, 1, 3), k, pick(rng, 1, 2), pad,
                       act);
  const Index batch = pick(rng, 1, 3);
  MatrixD x, z;
  do {
    c.weight = random_matrix(c.weight.rows(), c.weight.cols(), rng, 0.5);
    c.bias = random_matrix(c.out_channels, 1, rng, 0.3);
    x = random_matrix(c.input_size(), batch, rng);
    auto linear = c;
    linear.activation = nn::Activation::identity;
    z = nn::forward(linear, x);
  } while (!clear_of_kink(z, act));
  const MatrixD r = random_matrix(c.output_size(), batch, rng);
  const MatrixD y = nn::forward(c, x);
  auto grad = nn::zeros_like(c);
  MatrixD dx = nn::backward(c, x, y, r, grad);
  auto loss = [&] { return weighted_sum(nn::forward(c, x), r); };
  nn::ParamList<double> p, g;
  c.collect(p, "c");
  grad.collect(g, "c");
  return std::max(check_entries(x.data(), dx.data(), x.size(), loss), check_params(p, g, loss));
}

inline double lstm_trial(nn::Rng& rng) {
  nn::LstmCell<double> cell(pick(rng, 1, 4), pick(rng, 1, 4));
  cell.w_input = random_matrix(cell.w_input.rows(), cell.w_input.cols(), rng, 0.5);
  cell.w_hidden = random_matrix(cell.w_hidden.rows(), cell.w_hidden.cols(), rng, 0.5);
  cell.bias = random_matrix(cell.bias.rows(), 1, rng, 0.3);
  const Index batch = pick(rng, 1, 3), h = cell.hidden();
  MatrixD x = random_matrix(cell.inputs(), batch, rng);
  nn::LstmState<double> prev{random_matrix(h, batch, rng), random_matrix(h, batch, rng)};
  const MatrixD rh = random_matrix(h, batch, rng), rc = random_matrix(h, batch, rng);
  nn::LstmStepCache<double> cache;
  nn::forward(cell, x, prev, &cache);
  auto grad = nn::zeros_like(cell);
  const auto step = nn::backward(cell, cache, rh, rc, grad);
  auto loss = [&] {
    const auto next = nn::forward(cell, x, prev);
    return weighted_sum(next.hidden, rh) + weighted_sum(next.cell, rc);
  };
  nn::ParamList<double> p, g;
  cell.collect(p, "l");
  grad.collect(g, "l");
  double worst = check_entries(x.data(), step.input.data(), x.size(), loss);
  worst = std::max(worst, check_entries(prev.hidden.data(), step.hidden.data(), prev.hidden.size(), loss));
  worst = std::max(worst, check_entries(prev.cell.data(), step.cell.data(), prev.cell.size(), loss));
  return std::max(worst, check_params(p, g, loss));
}

inline double embedding_trial(nn::Rng& rng) {
  nn::Embedding<double> e(pick(rng, 2, 8), pick(rng, 1, 4));
  e.table = random_matrix(e.dim(), e.vocabulary(), rng);
  std::vector<Index> tokens(static_cast<std::size_t>(pick(rng, 1, 6)));
  for (auto& t : tokens) t = static_cast<Index>(rng.below(static_cast<std::uint64_t>(e.vocabulary())));
  const MatrixD r = random_matrix(e.dim(), static_cast<Index>(tokens.size()), rng);
  auto grad = nn::zeros_like(e);
  nn::backward(e, std::span<const Index>(tokens), r, grad);
  auto loss = [&] { return weighted_sum(nn::forward(e, std::span<const Index>(tokens)), r); };
  return check_entries(e.table.data(), grad.table.data(), e.table.size(), loss);
}

inline double softmax_ce_trial(nn::Rng& rng) {
  const Index k = pick(rng, 2, 8), batch = pick(rng, 1, 4);
  MatrixD logits = random_matrix(k, batch, rng, 2.0);
  std::vector<Index> targets(static_cast<std::size_t>(batch));
  for (auto& t : targets) t = static_cast<Index>(rng.below(static_cast<std::uint64_t>(k)));
  const MatrixD d = nn::softmax_cross_entropy_backward(nn::softmax(logits).eval(), std::span<const Index>(targets));
  auto loss = [&] { return nn::cross_entropy(nn::softmax(logits).eval(), std::span<const Index>(targets)); };
  return check_entries(logits.data(), d.data(), logits.size(), loss);
}

// Train-mode dropout is linear once the mask is drawn; the mask is the
// backward map.
inline double dropout_trial(nn::Rng& rng) {
  const Index rows = pick(rng, 1, 6), cols = pick(rng, 1, 4);
  const double p = rng.uniform(0.0, 0.9);
  MatrixD x = random_matrix(rows, cols, rng);
  const MatrixD r = random_matrix(rows, cols, rng);
  MatrixD mask;
  const std::uint64_t seed = rng.next_u64();
  nn::Rng draw(seed);
  nn::dropout(x, p, nn::Mode::train, draw, &mask);
  const MatrixD dx = (r.array() * mask.array()).matrix();
  auto loss = [&] {
    nn::Rng same(seed);
    return weighted_sum(nn::dropout(x, p, nn::Mode::train, same), r);
  };
  return check_entries(x.data(), dx.data(), x.size(), loss);
}

inline double mlp_trial(nn::Rng& rng) {
  std::vector<Index> sizes{pick(rng, 1, 5), pick(rng, 1, 5), pick(rng, 1, 5), pick(rng, 1, 3)};
  auto net = nn::make_mlp<double>(sizes, nn::Activation::tanh, nn::Activation::tanh);
  nn::initialize(net, rng);
  const Index batch = pick(rng, 1, 3);
  MatrixD x = random_matrix(sizes.front(), batch, rng);
  const MatrixD r = random_matrix(sizes.back(), batch, rng);
  nn::MlpTrace<double> tr;
  nn::forward(net, x, &tr);
  auto grad = nn::zeros_like(net);
  MatrixD dx = nn::backward(net, tr, r, grad);
  auto loss = [&] { return weighted_sum(nn::forward(net, x), r); };
  nn::ParamList<double> p, g;
  net.collect(p, "m");
  grad.collect(g, "m");
  return std::max(check_entries(x.data(), dx.data(), x.size(), loss), check_params(p, g, loss));
}

struct LayerCheck {
  const char* name;
  double (*trial)(nn::Rng&);
};

inline const std::vector<LayerCheck>& layer_checks() {
  static const std::vector<LayerCheck> checks{{"dense", dense_trial},         {"conv2d", conv_trial},
                                              {"lstm", lstm_trial},           {"embedding", embedding_trial},
                                              {"softmax_ce", softmax_ce_trial}, {"dropout", dropout_trial},
                                              {"mlp", mlp_trial}};
  return checks;
}

// Worst relative error over `trials` randomized instances.
inline double run_trials(const LayerCheck& c, int trials, std::uint64_t seed) {
  nn::Rng rng(seed, 0x6c);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) worst = std::max(worst, c.trial(rng));
  return worst;
}

}  // namespace xdrive::testing
