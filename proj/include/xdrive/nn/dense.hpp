#pragma once

#include <string>
#include <vector>

#include "xdrive/nn/activation.hpp"
#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

// Fully connected layer: y = act(W x + b).
template <typename Scalar>
struct Dense {
  Matrix<Scalar> weight;  // outputs x inputs
  Vector<Scalar> bias;
  Activation activation = Activation::identity;

  Dense() = default;
  Dense(Index inputs, Index outputs, Activation act)
      : weight(Matrix<Scalar>::Zero(outputs, inputs)), bias(Vector<Scalar>::Zero(outputs)), activation(act) {}

  Index inputs() const { return weight.cols(); }
  Index outputs() const { return weight.rows(); }

  void collect(ParamList<Scalar>& out, const std::string& prefix) {
    add_param(out, prefix + ".weight", weight);
    add_param(out, prefix + ".bias", bias);
  }
};

template <typename Scalar>
Dense<Scalar> zeros_like(const Dense<Scalar>& layer) {
  return Dense<Scalar>(layer.inputs(), layer.outputs(), layer.activation);
}

template <typename Scalar>
Matrix<Scalar> forward(const Dense<Scalar>& layer, const Matrix<Scalar>& x) {
  expect_rows(x.rows(), layer.inputs(), "dense input");
  Matrix<Scalar> z = layer.weight * x;
  z.colwise() += layer.bias;
  return activate(layer.activation, std::move(z));
}

// Accumulates parameter gradients into `grad` and returns dL/dx.
// `y` is the output of the matching forward call.
template <typename Scalar>
Matrix<Scalar> backward(const Dense<Scalar>& layer, const Matrix<Scalar>& x, const Matrix<Scalar>& y,
                        const Matrix<Scalar>& dy, Dense<Scalar>& grad) {
  expect_rows(x.rows(), layer.inputs(), "dense input");
  expect_rows(dy.rows(), layer.outputs(), "dense upstream gradient");
  if (dy.cols() != x.cols() || y.cols() != x.cols()) throw ShapeMismatch("dense batch size mismatch");
  if (grad.weight.rows() != layer.weight.rows() || grad.weight.cols() != layer.weight.cols())
    throw ShapeMismatch("dense gradient buffer shape");
  const Matrix<Scalar> dz = activation_backward(layer.activation, y, dy);
  grad.weight.noalias() += dz * x.transpose();
  grad.bias += dz.rowwise().sum();
  return layer.weight.transpose() * dz;
}

// Stack of dense layers with a per-call activation trace for backprop.
template <typename Scalar>
struct Mlp {
  std::vector<Dense<Scalar>> layers;

  Index inputs() const { return layers.front().inputs(); }
  Index outputs() const { return layers.back().outputs(); }

  void collect(ParamList<Scalar>& out, const std::string& prefix) {
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(out, prefix + ".l" + std::to_string(i));
  }
  ParamList<Scalar> parameters() {
    ParamList<Scalar> out;
    collect(out, "mlp");
    return out;
  }
};

template <typename Scalar>
struct MlpTrace {
  std::vector<Matrix<Scalar>> activations;  // [0] is the input
};

template <typename Scalar>
Mlp<Scalar> make_mlp(const std::vector<Index>& sizes, Activation hidden, Activation output) {
  if (sizes.size() < 2) throw InvalidArgument("mlp needs at least input and output sizes");
  Mlp<Scalar> net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    net.layers.emplace_back(sizes[i], sizes[i + 1], last ? output : hidden);
  }
  return net;
}

template <typename Scalar>
Mlp<Scalar> zeros_like(const Mlp<Scalar>& net) {
  Mlp<Scalar> g;
  for (const auto& l : net.layers) g.layers.push_back(zeros_like(l));
  return g;
}

template <typename Scalar>
Matrix<Scalar> forward(const Mlp<Scalar>& net, const Matrix<Scalar>& x, MlpTrace<Scalar>* trace = nullptr) {
  if (!trace) {
    Matrix<Scalar> h = x;
    for (const auto& l : net.layers) h = forward(l, h);
    return h;
  }
  trace->activations.clear();
  trace->activations.push_back(x);
  for (const auto& l : net.layers) trace->activations.push_back(forward(l, trace->activations.back()));
  return trace->activations.back();
}

template <typename Scalar>
Matrix<Scalar> backward(const Mlp<Scalar>& net, const MlpTrace<Scalar>& trace, const Matrix<Scalar>& dy,
                        Mlp<Scalar>& grad) {
  if (trace.activations.size() != net.layers.size() + 1) throw ShapeMismatch("mlp trace does not match network");
  Matrix<Scalar> g = dy;
  for (std::size_t i = net.layers.size(); i-- > 0;)
    g = backward(net.layers[i], trace.activations[i], trace.activations[i + 1], g, grad.layers[i]);
  return g;
}

}  // namespace xdrive::nn
