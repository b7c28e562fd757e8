#pragma once

#include <string>

#include "xdrive/nn/activation.hpp"
#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

// Standard gated LSTM cell. Gate rows are stacked in the order
// input, forget, candidate, output.
template <typename Scalar>
struct LstmCell {
  Matrix<Scalar> w_input;   // 4H x inputs
  Matrix<Scalar> w_hidden;  // 4H x H
  Vector<Scalar> bias;      // 4H

  LstmCell() = default;
  LstmCell(Index inputs, Index hidden)
      : w_input(Matrix<Scalar>::Zero(4 * hidden, inputs)),
        w_hidden(Matrix<Scalar>::Zero(4 * hidden, hidden)),
        bias(Vector<Scalar>::Zero(4 * hidden)) {}

  Index inputs() const { return w_input.cols(); }
  Index hidden() const { return w_hidden.cols(); }

  void collect(ParamList<Scalar>& out, const std::string& prefix) {
    add_param(out, prefix + ".w_input", w_input);
    add_param(out, prefix + ".w_hidden", w_hidden);
    add_param(out, prefix + ".bias", bias);
  }
};

template <typename Scalar>
LstmCell<Scalar> zeros_like(const LstmCell<Scalar>& c) {
  return LstmCell<Scalar>(c.inputs(), c.hidden());
}

template <typename Scalar>
struct LstmState {
  Matrix<Scalar> hidden;  // H x batch
  Matrix<Scalar> cell;

  static LstmState zeros(Index hidden, Index batch) {
    return {Matrix<Scalar>::Zero(hidden, batch), Matrix<Scalar>::Zero(hidden, batch)};
  }
};

template <typename Scalar>
struct LstmStepCache {
  Matrix<Scalar> x, h_prev, c_prev;
  Matrix<Scalar> input_gate, forget_gate, candidate, output_gate, cell_tanh;
};

template <typename Scalar>
struct LstmStepGrad {
  Matrix<Scalar> input;   // dL/dx
  Matrix<Scalar> hidden;  // dL/dh_prev
  Matrix<Scalar> cell;    // dL/dc_prev
};

template <typename Scalar>
LstmState<Scalar> forward(const LstmCell<Scalar>& cell, const Matrix<Scalar>& x, const LstmState<Scalar>& prev,
                          LstmStepCache<Scalar>* cache = nullptr) {
  const Index h = cell.hidden();
  expect_rows(x.rows(), cell.inputs(), "lstm input");
  expect_rows(prev.hidden.rows(), h, "lstm hidden state");
  expect_rows(prev.cell.rows(), h, "lstm cell state");
  if (prev.hidden.cols() != x.cols() || prev.cell.cols() != x.cols()) throw ShapeMismatch("lstm batch size mismatch");

  Matrix<Scalar> z = cell.w_input * x;
  z.noalias() += cell.w_hidden * prev.hidden;
  z.colwise() += cell.bias;
  Matrix<Scalar> i = activate<Scalar>(Activation::sigmoid, z.topRows(h));
  Matrix<Scalar> f = activate<Scalar>(Activation::sigmoid, z.middleRows(h, h));
  Matrix<Scalar> g = activate<Scalar>(Activation::tanh, z.middleRows(2 * h, h));
  Matrix<Scalar> o = activate<Scalar>(Activation::sigmoid, z.bottomRows(h));

  LstmState<Scalar> next;
  next.cell = (f.array() * prev.cell.array() + i.array() * g.array()).matrix();
  Matrix<Scalar> tc = next.cell.array().tanh().matrix();
  next.hidden = (o.array() * tc.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h_prev = prev.hidden;
    cache->c_prev = prev.cell;
    cache->input_gate = std::move(i);
    cache->forget_gate = std::move(f);
    cache->candidate = std::move(g);
    cache->output_gate = std::move(o);
    cache->cell_tanh = std::move(tc);
  }
  return next;
}

// Backward through one step given gradients flowing into the step's outputs
// (dh, dc). Parameter gradients accumulate into `grad`.
template <typename Scalar>
LstmStepGrad<Scalar> backward(const LstmCell<Scalar>& cell, const LstmStepCache<Scalar>& cache,
                              const Matrix<Scalar>& dh, const Matrix<Scalar>& dc, LstmCell<Scalar>& grad) {
  const Index h = cell.hidden();
  expect_rows(dh.rows(), h, "lstm hidden gradient");
  expect_rows(dc.rows(), h, "lstm cell gradient");
  const auto i = cache.input_gate.array();
  const auto f = cache.forget_gate.array();
  const auto g = cache.candidate.array();
  const auto o = cache.output_gate.array();
  const auto tc = cache.cell_tanh.array();

  const Matrix<Scalar> dc_total = (dc.array() + dh.array() * o * (Scalar(1) - tc.square())).matrix();
  Matrix<Scalar> dz(4 * h, dh.cols());
  dz.topRows(h) = (dc_total.array() * g * i * (Scalar(1) - i)).matrix();
  dz.middleRows(h, h) = (dc_total.array() * cache.c_prev.array() * f * (Scalar(1) - f)).matrix();
  dz.middleRows(2 * h, h) = (dc_total.array() * i * (Scalar(1) - g.square())).matrix();
  dz.bottomRows(h) = (dh.array() * tc * o * (Scalar(1) - o)).matrix();

  grad.w_input.noalias() += dz * cache.x.transpose();
  grad.w_hidden.noalias() += dz * cache.h_prev.transpose();
  grad.bias += dz.rowwise().sum();

  LstmStepGrad<Scalar> out;
  out.input = cell.w_input.transpose() * dz;
  out.hidden = cell.w_hidden.transpose() * dz;
  out.cell = (dc_total.array() * f).matrix();
  return out;
}

}  // namespace xdrive::nn
