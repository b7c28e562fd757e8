#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xdrive/errors.hpp"

namespace xdrive::nn {

using Index = Eigen::Index;

// Activations are laid out feature-major: one column per batch item.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixF = Matrix<float>;
using VectorF = Vector<float>;
using MatrixD = Matrix<double>;
using VectorD = Vector<double>;

// Flat, shaped scalar buffer. Used at serialization boundaries; the layers
// themselves work on Eigen matrices.
template <typename Scalar>
struct TensorBuf {
  std::vector<std::int64_t> shape;
  std::vector<Scalar> data;

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
  bool consistent() const { return numel() == static_cast<std::int64_t>(data.size()); }
};

// Non-owning view of one named parameter tensor inside a model. Models hand out
// lists of these so optimizers, checkpoints and target updates can treat every
// parameter uniformly.
template <typename Scalar>
struct ParamView {
  std::string name;
  Scalar* data = nullptr;
  Index rows = 0;
  Index cols = 0;

  Eigen::Map<Matrix<Scalar>> map() const { return {data, rows, cols}; }
  Index size() const { return rows * cols; }
};

template <typename Scalar>
using ParamList = std::vector<ParamView<Scalar>>;

template <typename Scalar, typename Derived>
void add_param(ParamList<Scalar>& out, const std::string& name, Eigen::PlainObjectBase<Derived>& t) {
  out.push_back({name, t.data(), t.rows(), t.cols()});
}

template <typename Scalar>
Index parameter_count(const ParamList<Scalar>& params) {
  Index n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

template <typename Scalar>
void check_same_layout(const ParamList<Scalar>& a, const ParamList<Scalar>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("parameter lists differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows != b[i].rows || a[i].cols != b[i].cols)
      throw ShapeMismatch("parameter '" + a[i].name + "' shape differs from '" + b[i].name + "'");
  }
}

template <typename Scalar>
void fill_zero(const ParamList<Scalar>& params) {
  for (const auto& p : params) p.map().setZero();
}

inline void expect_rows(Index got, Index want, const char* what) {
  if (got != want)
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(want) + " rows, got " +
                        std::to_string(got));
}

}  // namespace xdrive::nn
