#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates for one parameter tensor.
template <typename Scalar>
struct AdamSlot {
  Matrix<Scalar> first;
  Matrix<Scalar> second;
  std::int64_t step = 0;

  AdamSlot() = default;
  AdamSlot(Index rows, Index cols)
      : first(Matrix<Scalar>::Zero(rows, cols)), second(Matrix<Scalar>::Zero(rows, cols)) {}
};

// One bias-corrected Adam update of `param` in place.
template <typename Scalar, typename P, typename G>
void adam_step(Eigen::MatrixBase<P>& param, const Eigen::MatrixBase<G>& grad, AdamSlot<Scalar>& slot,
               const AdamConfig& cfg) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() || slot.first.rows() != param.rows() ||
      slot.first.cols() != param.cols())
    throw ShapeMismatch("adam: parameter, gradient and state shapes differ");
  slot.step += 1;
  const auto b1 = static_cast<Scalar>(cfg.beta1);
  const auto b2 = static_cast<Scalar>(cfg.beta2);
  slot.first = b1 * slot.first + (Scalar(1) - b1) * grad;
  slot.second = b2 * slot.second + (Scalar(1) - b2) * grad.cwiseAbs2();
  const double t = static_cast<double>(slot.step);
  const auto c1 = static_cast<Scalar>(1.0 - std::pow(cfg.beta1, t));
  const auto c2 = static_cast<Scalar>(1.0 - std::pow(cfg.beta2, t));
  const auto lr = static_cast<Scalar>(cfg.lr);
  const auto eps = static_cast<Scalar>(cfg.epsilon);
  param.derived().array() -=
      lr * (slot.first.array() / c1) / ((slot.second.array() / c2).sqrt() + eps);
}

// Adam over a whole parameter list; gradient lists must share its layout.
template <typename Scalar>
class Adam {
 public:
  Adam() = default;
  Adam(const ParamList<Scalar>& params, AdamConfig cfg) : cfg_(cfg) {
    slots_.reserve(params.size());
    for (const auto& p : params) slots_.emplace_back(p.rows, p.cols);
  }

  void step(const ParamList<Scalar>& params, const ParamList<Scalar>& grads) {
    check_same_layout(params, grads);
    if (params.size() != slots_.size()) throw ShapeMismatch("adam: parameter list changed since construction");
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i].map();
      adam_step(p, grads[i].map(), slots_[i], cfg_);
    }
  }

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  const std::vector<AdamSlot<Scalar>>& slots() const { return slots_; }

 private:
  AdamConfig cfg_;
  std::vector<AdamSlot<Scalar>> slots_;
};

}  // namespace xdrive::nn
