#pragma once

#include <string>

#include "xdrive/nn/rng.hpp"
#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

enum class Mode { train, eval };

// Inverted dropout. In train mode each element survives with probability
// 1 - p and is scaled by 1 / (1 - p); eval mode is the identity. When `mask`
// is given it receives the per-element multiplier, which is also the
// backward map (dx = dy .* mask).
template <typename Scalar>
Matrix<Scalar> dropout(const Matrix<Scalar>& x, double p, Mode mode, Rng& rng, Matrix<Scalar>* mask = nullptr) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidP("dropout probability must be in [0, 1), got " + std::to_string(p));
  if (mode == Mode::eval || p == 0.0) {
    if (mask) *mask = Matrix<Scalar>::Ones(x.rows(), x.cols());
    return x;
  }
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - p));
  Matrix<Scalar> m(x.rows(), x.cols());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform() < p ? Scalar(0) : keep_scale;
  Matrix<Scalar> y = (x.array() * m.array()).matrix();
  if (mask) *mask = std::move(m);
  return y;
}

}  // namespace xdrive::nn
