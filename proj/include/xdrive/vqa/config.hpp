#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "xdrive/nn/tensor.hpp"

namespace xdrive::vqa {

struct VqaConfig {
  nn::Index image_height = 64;
  nn::Index image_width = 64;
  nn::Index image_channels = 1;
  std::vector<nn::Index> conv_channels = {8, 16, 32};
  nn::Index image_feature_dim = 256;  // E
  nn::Index fusion_dim = 128;         // F
  nn::Index embed_dim = 32;
  nn::Index question_hidden = 64;     // H
  nn::Index question_layers = 2;
  nn::Index classifier_hidden = 128;  // C
  nn::Index classifier_layers = 2;
  double dropout_p = 0.5;
  nn::Index answer_count = 100;       // K
  nn::Index question_vocab = 0;       // filled from the vocabulary

  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  int epochs = 100;

  static VqaConfig desk() { return {}; }
  static VqaConfig paper_scale();
  void validate() const;
  bool operator==(const VqaConfig&) const = default;
};

nlohmann::ordered_json to_json(const VqaConfig& cfg);
VqaConfig config_from_json(const nlohmann::json& j);

}  // namespace xdrive::vqa
