#include "xdrive/vqa/config.hpp"

#include "xdrive/errors.hpp"

namespace xdrive::vqa {

VqaConfig VqaConfig::paper_scale() {
  VqaConfig c;
  c.image_height = 480;
  c.image_width = 640;
  c.image_channels = 3;
  c.conv_channels = {8, 16, 32, 64, 64};
  c.image_feature_dim = 4096;
  c.fusion_dim = 1024;
  c.embed_dim = 300;
  c.question_hidden = 512;
  c.classifier_hidden = 1000;
  c.answer_count = 1000;
  return c;
}

void VqaConfig::validate() const {
  for (nn::Index v : {image_height, image_width, image_channels, image_feature_dim, fusion_dim, embed_dim,
                      question_hidden, question_layers, classifier_hidden, classifier_layers, answer_count})
    if (v <= 0) throw InvalidConfig("vqa dimensions must all be positive");
  if (conv_channels.empty()) throw InvalidConfig("vqa needs at least one conv layer");
  for (auto c : conv_channels)
    if (c <= 0) throw InvalidConfig("conv channel counts must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw InvalidConfig("dropout_p must lie in [0, 1)");
  if (batch_size == 0 || epochs < 0 || !(learning_rate > 0.0)) throw InvalidConfig("bad vqa training settings");
}

nlohmann::ordered_json to_json(const VqaConfig& c) {
  nlohmann::ordered_json j;
  j["image_height"] = c.image_height;
  j["image_width"] = c.image_width;
  j["image_channels"] = c.image_channels;
  j["conv_channels"] = c.conv_channels;
  j["image_feature_dim"] = c.image_feature_dim;
  j["fusion_dim"] = c.fusion_dim;
  j["embed_dim"] = c.embed_dim;
  j["question_hidden"] = c.question_hidden;
  j["question_layers"] = c.question_layers;
  j["classifier_hidden"] = c.classifier_hidden;
  j["classifier_layers"] = c.classifier_layers;
  j["dropout_p"] = c.dropout_p;
  j["answer_count"] = c.answer_count;
  j["question_vocab"] = c.question_vocab;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  return j;
}

VqaConfig config_from_json(const nlohmann::json& j) {
  VqaConfig c;
  try {
    c.image_height = j.at("image_height").get<nn::Index>();
    c.image_width = j.at("image_width").get<nn::Index>();
    c.image_channels = j.at("image_channels").get<nn::Index>();
    c.conv_channels = j.at("conv_channels").get<std::vector<nn::Index>>();
    c.image_feature_dim = j.at("image_feature_dim").get<nn::Index>();
    c.fusion_dim = j.at("fusion_dim").get<nn::Index>();
    c.embed_dim = j.at("embed_dim").get<nn::Index>();
    c.question_hidden = j.at("question_hidden").get<nn::Index>();
    c.question_layers = j.at("question_layers").get<nn::Index>();
    c.classifier_hidden = j.at("classifier_hidden").get<nn::Index>();
    c.classifier_layers = j.at("classifier_layers").get<nn::Index>();
    c.dropout_p = j.at("dropout_p").get<double>();
    c.answer_count = j.at("answer_count").get<nn::Index>();
    c.question_vocab = j.at("question_vocab").get<nn::Index>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad vqa config: ") + e.what());
  }
  return c;
}

}  // namespace xdrive::vqa
