#pragma once

#include <string>

#include "xdrive/nn/activation.hpp"
#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

enum class Padding { valid, same };

// 2-D convolution over channel-major images stored one per column
// (index = (channel * height + row) * width + col). Square kernels.
template <typename Scalar>
struct Conv2d {
  Matrix<Scalar> weight;  // out_channels x (in_channels * kernel * kernel)
  Vector<Scalar> bias;
  Index in_channels = 0;
  Index in_height = 0;
  Index in_width = 0;
  Index out_channels = 0;
  Index kernel = 3;
  Index stride = 1;
  Padding padding = Padding::valid;
  Activation activation = Activation::relu;

  Conv2d() = default;
  Conv2d(Index in_c, Index height, Index width, Index out_c, Index k, Index s, Padding pad, Activation act)
      : weight(Matrix<Scalar>::Zero(out_c, in_c * k * k)),
        bias(Vector<Scalar>::Zero(out_c)),
        in_channels(in_c),
        in_height(height),
        in_width(width),
        out_channels(out_c),
        kernel(k),
        stride(s),
        padding(pad),
        activation(act) {
    if (k < 1 || s < 1) throw InvalidArgument("conv2d kernel and stride must be >= 1");
    if (out_height() < 1 || out_width() < 1) throw InvalidArgument("conv2d output would be empty");
  }

  Index pad() const { return padding == Padding::same ? (kernel - 1) / 2 : 0; }
  Index out_height() const { return (in_height + 2 * pad() - kernel) / stride + 1; }
  Index out_width() const { return (in_width + 2 * pad() - kernel) / stride + 1; }
  Index input_size() const { return in_channels * in_height * in_width; }
  Index output_size() const { return out_channels * out_height() * out_width(); }

  void collect(ParamList<Scalar>& out, const std::string& prefix) {
    add_param(out, prefix + ".weight", weight);
    add_param(out, prefix + ".bias", bias);
  }
};

template <typename Scalar>
Conv2d<Scalar> zeros_like(const Conv2d<Scalar>& c) {
  Conv2d<Scalar> g = c;
  g.weight.setZero();
  g.bias.setZero();
  return g;
}

namespace detail {

template <typename Scalar>
void im2col(const Conv2d<Scalar>& c, const Scalar* image, Matrix<Scalar>& cols) {
  const Index oh = c.out_height(), ow = c.out_width(), k = c.kernel, p = c.pad(), s = c.stride;
  cols.resize(c.in_channels * k * k, oh * ow);
  for (Index oy = 0; oy < oh; ++oy) {
    for (Index ox = 0; ox < ow; ++ox) {
      Scalar* col = cols.col(oy * ow + ox).data();
      Index row = 0;
      for (Index ch = 0; ch < c.in_channels; ++ch) {
        for (Index ky = 0; ky < k; ++ky) {
          const Index iy = oy * s + ky - p;
          for (Index kx = 0; kx < k; ++kx, ++row) {
            const Index ix = ox * s + kx - p;
            const bool inside = iy >= 0 && iy < c.in_height && ix >= 0 && ix < c.in_width;
            col[row] = inside ? image[(ch * c.in_height + iy) * c.in_width + ix] : Scalar(0);
          }
        }
      }
    }
  }
}

template <typename Scalar>
void col2im_add(const Conv2d<Scalar>& c, const Matrix<Scalar>& cols, Scalar* image) {
  const Index oh = c.out_height(), ow = c.out_width(), k = c.kernel, p = c.pad(), s = c.stride;
  for (Index oy = 0; oy < oh; ++oy) {
    for (Index ox = 0; ox < ow; ++ox) {
      const Scalar* col = cols.col(oy * ow + ox).data();
      Index row = 0;
      for (Index ch = 0; ch < c.in_channels; ++ch) {
        for (Index ky = 0; ky < k; ++ky) {
          const Index iy = oy * s + ky - p;
          for (Index kx = 0; kx < k; ++kx, ++row) {
            const Index ix = ox * s + kx - p;
            if (iy >= 0 && iy < c.in_height && ix >= 0 && ix < c.in_width)
              image[(ch * c.in_height + iy) * c.in_width + ix] += col[row];
          }
        }
      }
    }
  }
}

template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace detail

template <typename Scalar>
Matrix<Scalar> forward(const Conv2d<Scalar>& c, const Matrix<Scalar>& x) {
  expect_rows(x.rows(), c.input_size(), "conv2d input");
  const Index positions = c.out_height() * c.out_width();
  Matrix<Scalar> out(c.output_size(), x.cols());
  Matrix<Scalar> cols;
  Matrix<Scalar> z;
  for (Index n = 0; n < x.cols(); ++n) {
    detail::im2col(c, x.col(n).data(), cols);
    z.noalias() = c.weight * cols;
    z.colwise() += c.bias;
    Eigen::Map<detail::RowMajorMatrix<Scalar>>(out.col(n).data(), c.out_channels, positions) = z;
  }
  return activate(c.activation, std::move(out));
}

template <typename Scalar>
Matrix<Scalar> backward(const Conv2d<Scalar>& c, const Matrix<Scalar>& x, const Matrix<Scalar>& y,
                        const Matrix<Scalar>& dy, Conv2d<Scalar>& grad) {
  expect_rows(x.rows(), c.input_size(), "conv2d input");
  expect_rows(dy.rows(), c.output_size(), "conv2d upstream gradient");
  if (dy.cols() != x.cols() || y.cols() != x.cols()) throw ShapeMismatch("conv2d batch size mismatch");
  if (grad.weight.rows() != c.weight.rows() || grad.weight.cols() != c.weight.cols())
    throw ShapeMismatch("conv2d gradient buffer shape");
  const Index positions = c.out_height() * c.out_width();
  const Matrix<Scalar> dz = activation_backward(c.activation, y, dy);
  Matrix<Scalar> dx = Matrix<Scalar>::Zero(x.rows(), x.cols());
  Matrix<Scalar> cols;
  Matrix<Scalar> dcols;
  for (Index n = 0; n < x.cols(); ++n) {
    detail::im2col(c, x.col(n).data(), cols);
    const Matrix<Scalar> dzn =
        Eigen::Map<const detail::RowMajorMatrix<Scalar>>(dz.col(n).data(), c.out_channels, positions);
    grad.weight.noalias() += dzn * cols.transpose();
    grad.bias += dzn.rowwise().sum();
    dcols.noalias() = c.weight.transpose() * dzn;
    detail::col2im_add(c, dcols, dx.col(n).data());
  }
  return dx;
}

}  // namespace xdrive::nn
