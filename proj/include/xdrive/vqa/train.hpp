#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "xdrive/data/manifest.hpp"
#include "xdrive/data/vocab.hpp"
#include "xdrive/render/frame.hpp"
#include "xdrive/vqa/model.hpp"

namespace xdrive::vqa {

// Model plus the vocabularies it was built for.
struct VqaBundle {
  VqaModel<float> model;
  data::QuestionVocab questions;
  data::AnswerVocab answers;
};

// Sizes the config from the vocabularies and initializes the weights.
VqaBundle make_bundle(VqaConfig cfg, data::QuestionVocab questions, data::AnswerVocab answers, std::uint64_t seed);

// Weights go to `path` (checkpoint format), config and vocabularies to
// `path` + ".meta.json".
void save_bundle(const std::filesystem::path& path, VqaBundle& bundle);
VqaBundle load_bundle(const std::filesystem::path& path);
std::filesystem::path meta_path(const std::filesystem::path& model_path);

struct Dataset {
  nn::MatrixF images;  // one channel-major column per example
  std::vector<std::vector<Index>> questions;
  std::vector<Index> answers;
  std::size_t size() const { return answers.size(); }
};

nn::VectorF frame_input(const VqaConfig& cfg, const render::Frame& frame);

using FrameLoader = std::function<render::Frame(const data::QARecord&)>;
FrameLoader manifest_loader(const std::filesystem::path& manifest_path);

// Throws UnknownAnswer if an answer is missing from the vocabulary.
Dataset make_dataset(const VqaBundle& bundle, const std::vector<data::QARecord>& records, const FrameLoader& load);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;      // mean cross-entropy over the epoch's batches (train mode)
  double accuracy = 0.0;  // training-batch top-1 accuracy (train mode)
};

std::vector<EpochStats> train_vqa(VqaBundle& bundle, const Dataset& data, int epochs, std::uint64_t seed,
                                  const std::function<void(const EpochStats&)>& on_epoch = {});

// Eval-mode probabilities for every example (K x N), computed in batches.
nn::MatrixF predict_all(const VqaBundle& bundle, const Dataset& data, std::size_t batch = 64);
double accuracy(const VqaBundle& bundle, const Dataset& data);

}  // namespace xdrive::vqa
