#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "xdrive/data/manifest.hpp"
#include "xdrive/nn/rng.hpp"
#include "xdrive/vqa/predict.hpp"

namespace xdrive::vqa {

struct Answer {
  Index index = 0;
  double prob = 0.0;  // top-1 softmax probability
};

// Anything that picks one answer from the vocabulary for a record.
class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual Answer answer(const data::QARecord& record) = 0;
};

class ModelAnswerer : public Answerer {
 public:
  ModelAnswerer(const VqaBundle& bundle, FrameLoader load) : bundle_(&bundle), load_(std::move(load)) {}
  Answer answer(const data::QARecord& record) override;

 private:
  const VqaBundle* bundle_;
  FrameLoader load_;
};

// Always returns the ground truth with probability 1.
class OracleAnswerer : public Answerer {
 public:
  explicit OracleAnswerer(const data::AnswerVocab& answers) : answers_(&answers) {}
  Answer answer(const data::QARecord& record) override;

 private:
  const data::AnswerVocab* answers_;
};

// Uniform over the K answers, probability 1/K each.
class RandomAnswerer : public Answerer {
 public:
  RandomAnswerer(Index k, std::uint64_t seed) : k_(k), rng_(seed, 0x4a4d) {}
  Answer answer(const data::QARecord& record) override;

 private:
  Index k_;
  nn::Rng rng_;
};

inline constexpr std::size_t kOtherColumn = sim::kCategoryCount;

struct CategoryRow {
  sim::ActionCategory category{};
  std::size_t correct = 0;
  std::size_t total = 0;
  double mean_top1 = 0.0;
};

struct Report {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  std::array<CategoryRow, sim::kCategoryCount> rows{};
  // rows: true category; columns: predicted target answer, last column "other"
  std::array<std::array<std::size_t, sim::kCategoryCount + 1>, sim::kCategoryCount> confusion{};
};

// correct / total; zero total is rejected.
double accuracy(std::size_t correct, std::size_t total);

// Throws InvalidArgument on an empty record list.
Report evaluate(const std::vector<data::QARecord>& records, const data::AnswerVocab& answers, Answerer& answerer);

std::string format_report(const Report& r);
nlohmann::ordered_json to_json(const Report& r);

}  // namespace xdrive::vqa
