#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

// Column-wise softmax, stabilized by subtracting each column's max.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> p = logits;
  for (Index n = 0; n < p.cols(); ++n) {
    auto col = p.col(n);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  return p;
}

// Mean over the batch of -log p[target].
template <typename Scalar>
Scalar cross_entropy(const Matrix<Scalar>& probs, std::span<const Index> targets) {
  if (probs.cols() != static_cast<Index>(targets.size())) throw ShapeMismatch("cross-entropy batch size mismatch");
  Scalar total = 0;
  for (Index n = 0; n < probs.cols(); ++n) {
    const Index t = targets[static_cast<std::size_t>(n)];
    if (t < 0 || t >= probs.rows()) throw ShapeMismatch("cross-entropy target out of range");
    total -= std::log(std::max(probs(t, n), std::numeric_limits<Scalar>::min()));
  }
  return probs.cols() > 0 ? total / static_cast<Scalar>(probs.cols()) : Scalar(0);
}

// Gradient of mean cross-entropy w.r.t. the logits that produced `probs`.
template <typename Scalar>
Matrix<Scalar> softmax_cross_entropy_backward(const Matrix<Scalar>& probs, std::span<const Index> targets) {
  if (probs.cols() != static_cast<Index>(targets.size())) throw ShapeMismatch("cross-entropy batch size mismatch");
  Matrix<Scalar> d = probs;
  for (Index n = 0; n < d.cols(); ++n) d(targets[static_cast<std::size_t>(n)], n) -= Scalar(1);
  return d / static_cast<Scalar>(std::max<Index>(d.cols(), 1));
}

}  // namespace xdrive::nn
