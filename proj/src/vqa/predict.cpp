#include "xdrive/vqa/predict.hpp"

#include <algorithm>
#include <numeric>

#include "xdrive/errors.hpp"

namespace xdrive::vqa {

Prediction rank_answers(const data::AnswerVocab& answers, const nn::VectorF& probs, std::size_t k) {
  const auto K = static_cast<std::size_t>(probs.size());
  if (K != static_cast<std::size_t>(answers.size())) throw ShapeMismatch("distribution size differs from answer count");
  if (k == 0 || k > K) throw InvalidArgument("k must lie in [1, " + std::to_string(K) + "], got " + std::to_string(k));
  std::vector<Index> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return probs(a) > probs(b); });
  Prediction p;
  p.distribution.assign(probs.data(), probs.data() + K);
  for (std::size_t i = 0; i < k; ++i) p.ranked.push_back({answers.at(order[i]), static_cast<double>(probs(order[i])), order[i]});
  return p;
}

Prediction predict_topk(const VqaBundle& bundle, const render::Frame& frame, std::string_view question, std::size_t k) {
  const auto tokens = bundle.questions.encode(question);
  if (tokens.empty()) throw EmptyQuestion("question has no tokens");
  const nn::MatrixF image = frame_input(bundle.model.cfg, frame);
  const nn::MatrixF probs = forward(bundle.model, image, TokenBatch::from({tokens}), nn::Mode::eval, nullptr);
  return rank_answers(bundle.answers, probs.col(0), k);
}

nlohmann::ordered_json answers_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["answers"] = nlohmann::ordered_json::array();
  for (const auto& r : p.ranked) j["answers"].push_back({{"text", r.text}, {"prob", r.prob}});
  return j;
}

}  // namespace xdrive::vqa
