#pragma once

#include <span>
#include <string>

#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

// Token lookup table; column t is the embedding of token t.
template <typename Scalar>
struct Embedding {
  Matrix<Scalar> table;  // dim x vocabulary

  Embedding() = default;
  Embedding(Index vocabulary, Index dim) : table(Matrix<Scalar>::Zero(dim, vocabulary)) {}

  Index dim() const { return table.rows(); }
  Index vocabulary() const { return table.cols(); }

  void collect(ParamList<Scalar>& out, const std::string& prefix) { add_param(out, prefix + ".table", table); }
};

template <typename Scalar>
Embedding<Scalar> zeros_like(const Embedding<Scalar>& e) {
  return Embedding<Scalar>(e.vocabulary(), e.dim());
}

template <typename Scalar>
Matrix<Scalar> forward(const Embedding<Scalar>& e, std::span<const Index> tokens) {
  Matrix<Scalar> out(e.dim(), static_cast<Index>(tokens.size()));
  for (std::size_t n = 0; n < tokens.size(); ++n) {
    if (tokens[n] < 0 || tokens[n] >= e.vocabulary()) throw ShapeMismatch("token index outside embedding table");
    out.col(static_cast<Index>(n)) = e.table.col(tokens[n]);
  }
  return out;
}

template <typename Scalar>
void backward(const Embedding<Scalar>& e, std::span<const Index> tokens, const Matrix<Scalar>& dy,
              Embedding<Scalar>& grad) {
  expect_rows(dy.rows(), e.dim(), "embedding upstream gradient");
  if (dy.cols() != static_cast<Index>(tokens.size())) throw ShapeMismatch("embedding batch size mismatch");
  for (std::size_t n = 0; n < tokens.size(); ++n) grad.table.col(tokens[n]) += dy.col(static_cast<Index>(n));
}

}  // namespace xdrive::nn
