#pragma once

#include <span>
#include <string>
#include <vector>

#include "xdrive/nn/conv2d.hpp"
#include "xdrive/nn/dense.hpp"
#include "xdrive/nn/dropout.hpp"
#include "xdrive/nn/embedding.hpp"
#include "xdrive/nn/init.hpp"
#include "xdrive/nn/lstm.hpp"
#include "xdrive/nn/softmax.hpp"
#include "xdrive/vqa/config.hpp"

namespace xdrive::vqa {

using nn::Index;
using nn::Matrix;
using nn::Vector;

// Image path: conv stack -> flatten -> dense E (relu) -> linear F.
// Question path: embedding -> stacked LSTM -> [h, c of every layer] -> linear F.
// Fusion is the elementwise product; the classifier is
// (dense C, tanh, dropout) x layers -> dense K -> softmax.
template <typename Scalar>
struct VqaModel {
  VqaConfig cfg;
  std::vector<nn::Conv2d<Scalar>> convs;
  nn::Dense<Scalar> image_fc;
  nn::Dense<Scalar> image_proj;
  nn::Embedding<Scalar> embed;
  std::vector<nn::LstmCell<Scalar>> lstm;
  nn::Dense<Scalar> question_proj;
  std::vector<nn::Dense<Scalar>> hidden;
  nn::Dense<Scalar> output;

  VqaModel() = default;
  explicit VqaModel(const VqaConfig& c) : cfg(c) {
    cfg.validate();
    if (cfg.question_vocab <= 1) throw InvalidConfig("question vocabulary must be set before building the model");
    Index ch = cfg.image_channels, h = cfg.image_height, w = cfg.image_width;
    for (Index oc : cfg.conv_channels) {
      convs.emplace_back(ch, h, w, oc, 3, 2, nn::Padding::same, nn::Activation::relu);
      ch = oc;
      h = convs.back().out_height();
      w = convs.back().out_width();
    }
    image_fc = nn::Dense<Scalar>(convs.back().output_size(), cfg.image_feature_dim, nn::Activation::relu);
    image_proj = nn::Dense<Scalar>(cfg.image_feature_dim, cfg.fusion_dim, nn::Activation::identity);
    embed = nn::Embedding<Scalar>(cfg.question_vocab, cfg.embed_dim);
    for (Index l = 0; l < cfg.question_layers; ++l)
      lstm.emplace_back(l == 0 ? cfg.embed_dim : cfg.question_hidden, cfg.question_hidden);
    question_proj = nn::Dense<Scalar>(2 * cfg.question_layers * cfg.question_hidden, cfg.fusion_dim,
                                      nn::Activation::identity);
    for (Index l = 0; l < cfg.classifier_layers; ++l)
      hidden.emplace_back(l == 0 ? cfg.fusion_dim : cfg.classifier_hidden, cfg.classifier_hidden, nn::Activation::tanh);
    output = nn::Dense<Scalar>(cfg.classifier_hidden, cfg.answer_count, nn::Activation::identity);
  }

  void collect(nn::ParamList<Scalar>& out) {
    for (std::size_t i = 0; i < convs.size(); ++i) convs[i].collect(out, "image.conv" + std::to_string(i));
    image_fc.collect(out, "image.fc");
    image_proj.collect(out, "image.proj");
    embed.collect(out, "question.embed");
    for (std::size_t i = 0; i < lstm.size(); ++i) lstm[i].collect(out, "question.lstm" + std::to_string(i));
    question_proj.collect(out, "question.proj");
    for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i].collect(out, "classifier.hidden" + std::to_string(i));
    output.collect(out, "classifier.output");
  }
  nn::ParamList<Scalar> parameters() {
    nn::ParamList<Scalar> out;
    collect(out);
    return out;
  }

  void initialize(nn::Rng& rng) {
    for (auto& c : convs) nn::initialize(c, rng);
    nn::initialize(image_fc, rng);
    nn::initialize(image_proj, rng);
    nn::initialize(embed, rng);
    for (auto& c : lstm) nn::initialize(c, rng);
    nn::initialize(question_proj, rng);
    for (auto& d : hidden) nn::initialize(d, rng);
    nn::initialize(output, rng);
  }

  Index image_size() const { return cfg.image_channels * cfg.image_height * cfg.image_width; }
};

template <typename Scalar>
VqaModel<Scalar> zeros_like(const VqaModel<Scalar>& m) {
  VqaModel<Scalar> g = m;
  for (const auto& p : g.parameters()) p.map().setZero();
  return g;
}

// Token sequences of a batch, padded to a common length with a mask.
struct TokenBatch {
  std::vector<std::vector<Index>> steps;  // steps[t][n]; padding uses index 0
  std::vector<std::vector<bool>> live;    // live[t][n]: item n still has tokens at t
  Index batch = 0;

  static TokenBatch from(const std::vector<std::vector<Index>>& questions);
};

inline TokenBatch TokenBatch::from(const std::vector<std::vector<Index>>& questions) {
  TokenBatch tb;
  tb.batch = static_cast<Index>(questions.size());
  std::size_t longest = 0;
  for (const auto& q : questions) {
    if (q.empty()) throw EmptyQuestion("question has no tokens");
    longest = std::max(longest, q.size());
  }
  tb.steps.assign(longest, std::vector<Index>(questions.size(), 0));
  tb.live.assign(longest, std::vector<bool>(questions.size(), false));
  for (std::size_t n = 0; n < questions.size(); ++n)
    for (std::size_t t = 0; t < questions[n].size(); ++t) {
      tb.steps[t][n] = questions[n][t];
      tb.live[t][n] = true;
    }
  return tb;
}

template <typename Scalar>
struct VqaTrace {
  std::vector<Matrix<Scalar>> conv_acts;  // [0] = input images
  Matrix<Scalar> image_feat, image_vec;
  std::vector<Matrix<Scalar>> embedded;                        // per step
  std::vector<std::vector<nn::LstmStepCache<Scalar>>> caches;  // [t][layer]
  std::vector<Matrix<Scalar>> masks;                           // per step, 1 x B
  Matrix<Scalar> question_state, question_vec;
  Matrix<Scalar> fused;
  std::vector<Matrix<Scalar>> hidden_pre_dropout, hidden_out, dropout_masks;
  Matrix<Scalar> probs;
};

template <typename Scalar>
Matrix<Scalar> encode_images(const VqaModel<Scalar>& m, const Matrix<Scalar>& images, VqaTrace<Scalar>* tr = nullptr) {
  nn::expect_rows(images.rows(), m.image_size(), "vqa image");
  Matrix<Scalar> h = images;
  if (tr) tr->conv_acts = {images};
  for (const auto& c : m.convs) {
    h = nn::forward(c, h);
    if (tr) tr->conv_acts.push_back(h);
  }
  Matrix<Scalar> feat = nn::forward(m.image_fc, h);
  Matrix<Scalar> vec = nn::forward(m.image_proj, feat);
  if (tr) {
    tr->image_feat = feat;
    tr->image_vec = vec;
  }
  return vec;
}

template <typename Scalar>
Matrix<Scalar> encode_questions(const VqaModel<Scalar>& m, const TokenBatch& tb, VqaTrace<Scalar>* tr = nullptr) {
  const Index H = m.cfg.question_hidden, B = tb.batch;
  std::vector<nn::LstmState<Scalar>> state(m.lstm.size(), nn::LstmState<Scalar>::zeros(H, B));
  if (tr) {
    tr->embedded.clear();
    tr->caches.assign(tb.steps.size(), std::vector<nn::LstmStepCache<Scalar>>(m.lstm.size()));
    tr->masks.clear();
  }
  for (std::size_t t = 0; t < tb.steps.size(); ++t) {
    Matrix<Scalar> mask(1, B);
    for (Index n = 0; n < B; ++n) mask(0, n) = tb.live[t][static_cast<std::size_t>(n)] ? Scalar(1) : Scalar(0);
    Matrix<Scalar> x = nn::forward(m.embed, std::span<const Index>(tb.steps[t]));
    if (tr) {
      tr->embedded.push_back(x);
      tr->masks.push_back(mask);
    }
    for (std::size_t l = 0; l < m.lstm.size(); ++l) {
      auto next = nn::forward(m.lstm[l], x, state[l], tr ? &tr->caches[t][l] : nullptr);
      for (Index n = 0; n < B; ++n) {
        if (mask(0, n) == Scalar(0)) continue;
        state[l].hidden.col(n) = next.hidden.col(n);
        state[l].cell.col(n) = next.cell.col(n);
      }
      x = state[l].hidden;
    }
  }
  Matrix<Scalar> concat(2 * H * static_cast<Index>(m.lstm.size()), B);
  for (std::size_t l = 0; l < m.lstm.size(); ++l) {
    concat.middleRows(static_cast<Index>(2 * l) * H, H) = state[l].hidden;
    concat.middleRows(static_cast<Index>(2 * l + 1) * H, H) = state[l].cell;
  }
  Matrix<Scalar> vec = nn::forward(m.question_proj, concat);
  if (tr) {
    tr->question_state = concat;
    tr->question_vec = vec;
  }
  return vec;
}

// Elementwise product.
template <typename A, typename B>
auto fuse(const Eigen::MatrixBase<A>& image, const Eigen::MatrixBase<B>& question) {
  if (image.rows() != question.rows() || image.cols() != question.cols())
    throw ShapeMismatch("fusion operands differ in shape");
  return image.cwiseProduct(question).eval();
}

template <typename Scalar>
Matrix<Scalar> classify(const VqaModel<Scalar>& m, const Matrix<Scalar>& fused, nn::Mode mode, nn::Rng* rng,
                        VqaTrace<Scalar>* tr = nullptr) {
  nn::expect_rows(fused.rows(), m.cfg.fusion_dim, "classifier input");
  if (mode == nn::Mode::train && !rng) throw InvalidArgument("train-mode classification needs an rng");
  nn::Rng unused;
  Matrix<Scalar> h = fused;
  if (tr) {
    tr->hidden_pre_dropout.clear();
    tr->hidden_out.clear();
    tr->dropout_masks.clear();
  }
  for (const auto& layer : m.hidden) {
    Matrix<Scalar> a = nn::forward(layer, h);
    Matrix<Scalar> mask;
    h = nn::dropout(a, m.cfg.dropout_p, mode, rng ? *rng : unused, &mask);
    if (tr) {
      tr->hidden_pre_dropout.push_back(std::move(a));
      tr->hidden_out.push_back(h);
      tr->dropout_masks.push_back(std::move(mask));
    }
  }
  Matrix<Scalar> probs = nn::softmax(nn::forward(m.output, h));
  if (tr) tr->probs = probs;
  return probs;
}

// Full forward pass: K x B answer distributions.
template <typename Scalar>
Matrix<Scalar> forward(const VqaModel<Scalar>& m, const Matrix<Scalar>& images, const TokenBatch& tb, nn::Mode mode,
                       nn::Rng* rng, VqaTrace<Scalar>* tr = nullptr) {
  if (images.cols() != tb.batch) throw ShapeMismatch("image and question batch sizes differ");
  const Matrix<Scalar> vi = encode_images(m, images, tr);
  const Matrix<Scalar> vq = encode_questions(m, tb, tr);
  Matrix<Scalar> fused = fuse(vi, vq);
  if (tr) tr->fused = fused;
  return classify(m, fused, mode, rng, tr);
}

// Backward from dL/dlogits (K x B). Gradients accumulate into `g`.
template <typename Scalar>
void backward(const VqaModel<Scalar>& m, const TokenBatch& tb, const VqaTrace<Scalar>& tr, const Matrix<Scalar>& dlogits,
              VqaModel<Scalar>& g) {
  const Index H = m.cfg.question_hidden;
  // classifier
  const Matrix<Scalar>& last_h = m.hidden.empty() ? tr.fused : tr.hidden_out.back();
  const Matrix<Scalar> logits_dummy = Matrix<Scalar>::Zero(dlogits.rows(), dlogits.cols());
  Matrix<Scalar> dh = nn::backward(m.output, last_h, logits_dummy, dlogits, g.output);
  for (std::size_t i = m.hidden.size(); i-- > 0;) {
    dh = (dh.array() * tr.dropout_masks[i].array()).matrix();
    const Matrix<Scalar>& in = i == 0 ? tr.fused : tr.hidden_out[i - 1];
    dh = nn::backward(m.hidden[i], in, tr.hidden_pre_dropout[i], dh, g.hidden[i]);
  }
  // fusion
  const Matrix<Scalar> dvi = (dh.array() * tr.question_vec.array()).matrix();
  const Matrix<Scalar> dvq = (dh.array() * tr.image_vec.array()).matrix();

  // image path
  Matrix<Scalar> d = nn::backward(m.image_proj, tr.image_feat, tr.image_vec, dvi, g.image_proj);
  d = nn::backward(m.image_fc, tr.conv_acts.back(), tr.image_feat, d, g.image_fc);
  for (std::size_t i = m.convs.size(); i-- > 0;) {
    if (i == 0) {
      // the raw image needs no gradient
      nn::Conv2d<Scalar>& gc = g.convs[0];
      const auto& c = m.convs[0];
      const Matrix<Scalar> dz = nn::activation_backward(c.activation, tr.conv_acts[1], d);
      const Index positions = c.out_height() * c.out_width();
      Matrix<Scalar> cols;
      for (Index n = 0; n < dz.cols(); ++n) {
        nn::detail::im2col(c, tr.conv_acts[0].col(n).data(), cols);
        const Matrix<Scalar> dzn =
            Eigen::Map<const nn::detail::RowMajorMatrix<Scalar>>(dz.col(n).data(), c.out_channels, positions);
        gc.weight.noalias() += dzn * cols.transpose();
        gc.bias += dzn.rowwise().sum();
      }
      break;
    }
    d = nn::backward(m.convs[i], tr.conv_acts[i], tr.conv_acts[i + 1], d, g.convs[i]);
  }

  // question path
  const Matrix<Scalar> dstate = nn::backward(m.question_proj, tr.question_state, tr.question_vec, dvq, g.question_proj);
  const std::size_t L = m.lstm.size();
  std::vector<Matrix<Scalar>> dhs(L), dcs(L);
  for (std::size_t l = 0; l < L; ++l) {
    dhs[l] = dstate.middleRows(static_cast<Index>(2 * l) * H, H);
    dcs[l] = dstate.middleRows(static_cast<Index>(2 * l + 1) * H, H);
  }
  for (std::size_t t = tb.steps.size(); t-- > 0;) {
    const auto mask = tr.masks[t].row(0).array();
    for (std::size_t l = L; l-- > 0;) {
      const Matrix<Scalar> dh_live = (dhs[l].array().rowwise() * mask).matrix();
      const Matrix<Scalar> dc_live = (dcs[l].array().rowwise() * mask).matrix();
      auto step = nn::backward(m.lstm[l], tr.caches[t][l], dh_live, dc_live, g.lstm[l]);
      // padded columns carry their state through unchanged
      dhs[l] = step.hidden + (dhs[l] - dh_live);
      dcs[l] = step.cell + (dcs[l] - dc_live);
      if (l > 0) dhs[l - 1] += step.input;
      else nn::backward(m.embed, std::span<const Index>(tb.steps[t]), step.input, g.embed);
    }
  }
}

// Channel-major image column from interleaved 8-bit pixels.
template <typename Scalar>
void image_column(const std::uint8_t* pixels, Index height, Index width, Index channels, Scalar* out) {
  for (Index c = 0; c < channels; ++c)
    for (Index y = 0; y < height; ++y)
      for (Index x = 0; x < width; ++x)
        out[(c * height + y) * width + x] = static_cast<Scalar>(pixels[(y * width + x) * channels + c]) / Scalar(255);
}

}  // namespace xdrive::vqa
