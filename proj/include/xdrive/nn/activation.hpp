#pragma once

#include <string_view>

#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

enum class Activation { identity, relu, tanh, sigmoid };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

template <typename Scalar>
Matrix<Scalar> activate(Activation a, Matrix<Scalar> z) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(Scalar(0)); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    case Activation::sigmoid:
      z = (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
      break;
  }
  return z;
}

// Gradient through the activation, expressed in terms of the activation's
// output y (all four functions admit that form).
template <typename Scalar>
Matrix<Scalar> activation_backward(Activation a, const Matrix<Scalar>& y, const Matrix<Scalar>& dy) {
  switch (a) {
    case Activation::identity: return dy;
    case Activation::relu: return (y.array() > Scalar(0)).select(dy, Scalar(0));
    case Activation::tanh: return (dy.array() * (Scalar(1) - y.array().square())).matrix();
    case Activation::sigmoid: return (dy.array() * y.array() * (Scalar(1) - y.array())).matrix();
  }
  return dy;
}

}  // namespace xdrive::nn
