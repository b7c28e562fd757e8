#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "xdrive/vqa/train.hpp"

namespace xdrive::vqa {

struct RankedAnswer {
  std::string text;
  double prob = 0.0;
  Index index = 0;
};

struct Prediction {
  std::vector<RankedAnswer> ranked;  // descending, ties to the lower index
  std::vector<double> distribution;  // full softmax over the answer vocabulary
  const RankedAnswer& chosen() const { return ranked.front(); }
};

// Ranks a probability column. Throws InvalidArgument unless 1 <= k <= K.
Prediction rank_answers(const data::AnswerVocab& answers, const nn::VectorF& probs, std::size_t k);

Prediction predict_topk(const VqaBundle& bundle, const render::Frame& frame, std::string_view question,
                        std::size_t k = 5);

// {"answers": [{"text", "prob"}, ...]}; the shape shared by explain and /api/ask.
nlohmann::ordered_json answers_json(const Prediction& p);

}  // namespace xdrive::vqa
