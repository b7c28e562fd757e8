#pragma once

#include <cmath>

#include "xdrive/nn/conv2d.hpp"
#include "xdrive/nn/dense.hpp"
#include "xdrive/nn/embedding.hpp"
#include "xdrive/nn/lstm.hpp"
#include "xdrive/nn/rng.hpp"

namespace xdrive::nn {

template <typename Derived>
void fill_uniform(Eigen::PlainObjectBase<Derived>& m, double bound, Rng& rng) {
  using Scalar = typename Derived::Scalar;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
}

template <typename Derived>
void xavier_uniform(Eigen::PlainObjectBase<Derived>& w, Index fan_in, Index fan_out, Rng& rng) {
  fill_uniform(w, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template <typename Scalar>
void initialize(Dense<Scalar>& layer, Rng& rng) {
  xavier_uniform(layer.weight, layer.inputs(), layer.outputs(), rng);
  layer.bias.setZero();
}

template <typename Scalar>
void initialize(Conv2d<Scalar>& c, Rng& rng) {
  const Index area = c.kernel * c.kernel;
  xavier_uniform(c.weight, c.in_channels * area, c.out_channels * area, rng);
  c.bias.setZero();
}

// Uniform(+-1/sqrt(H)) weights, zero biases except the forget gate at +1.
template <typename Scalar>
void initialize(LstmCell<Scalar>& cell, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cell.hidden()));
  fill_uniform(cell.w_input, bound, rng);
  fill_uniform(cell.w_hidden, bound, rng);
  cell.bias.setZero();
  cell.bias.segment(cell.hidden(), cell.hidden()).setConstant(Scalar(1));
}

template <typename Scalar>
void initialize(Embedding<Scalar>& e, Rng& rng) {
  fill_uniform(e.table, 0.1, rng);
}

template <typename Scalar>
void initialize(Mlp<Scalar>& net, Rng& rng) {
  for (auto& l : net.layers) initialize(l, rng);
}

}  // namespace xdrive::nn
