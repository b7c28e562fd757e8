#include "xdrive/vqa/train.hpp"

#include <fstream>
#include <numeric>

#include "xdrive/errors.hpp"
#include "xdrive/nn/adam.hpp"
#include "xdrive/nn/checkpoint.hpp"

namespace xdrive::vqa {

VqaBundle make_bundle(VqaConfig cfg, data::QuestionVocab questions, data::AnswerVocab answers, std::uint64_t seed) {
  cfg.question_vocab = questions.size();
  cfg.answer_count = answers.size();
  VqaBundle b{VqaModel<float>(cfg), std::move(questions), std::move(answers)};
  nn::Rng rng(seed, 0x7a9);
  b.model.initialize(rng);
  return b;
}

std::filesystem::path meta_path(const std::filesystem::path& model_path) {
  return model_path.string() + ".meta.json";
}

void save_bundle(const std::filesystem::path& path, VqaBundle& bundle) {
  nn::save_parameters(path, bundle.model.parameters());
  nlohmann::ordered_json j;
  j["config"] = to_json(bundle.model.cfg);
  j["question_tokens"] = bundle.questions.tokens();
  j["answers"] = bundle.answers.answers();
  std::ofstream out(meta_path(path), std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + meta_path(path).string());
  out << j.dump(2) << "\n";
}

VqaBundle load_bundle(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingPrerequisite("model not found: " + path.string());
  std::ifstream in(meta_path(path));
  if (!in) throw MissingPrerequisite("model metadata not found: " + meta_path(path).string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model metadata: ") + e.what());
  }
  auto tokens = j.at("question_tokens").get<std::vector<std::string>>();
  if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>")
    throw FormatError("model metadata has malformed question tokens");
  data::QuestionVocab q(std::vector<std::string>(tokens.begin() + 2, tokens.end()));
  data::AnswerVocab a(j.at("answers").get<std::vector<std::string>>());
  VqaConfig cfg = config_from_json(j.at("config"));
  if (cfg.question_vocab != q.size() || cfg.answer_count != a.size())
    throw FormatError("model metadata vocabulary sizes disagree with its config");
  VqaBundle b{VqaModel<float>(cfg), std::move(q), std::move(a)};
  nn::load_parameters(path, b.model.parameters());
  return b;
}

nn::VectorF frame_input(const VqaConfig& cfg, const render::Frame& frame) {
  if (frame.width != cfg.image_width || frame.height != cfg.image_height || frame.channels != cfg.image_channels)
    throw ShapeMismatch("frame is " + std::to_string(frame.width) + "x" + std::to_string(frame.height) + "x" +
                        std::to_string(frame.channels) + ", model expects " + std::to_string(cfg.image_width) + "x" +
                        std::to_string(cfg.image_height) + "x" + std::to_string(cfg.image_channels));
  if (!frame.valid()) throw ShapeMismatch("frame pixel buffer does not match its size");
  nn::VectorF v(cfg.image_channels * cfg.image_height * cfg.image_width);
  image_column(frame.pixels.data(), cfg.image_height, cfg.image_width, cfg.image_channels, v.data());
  return v;
}

FrameLoader manifest_loader(const std::filesystem::path& manifest_path) {
  return [manifest_path](const data::QARecord& r) { return render::read_frame(data::resolve_frame(manifest_path, r)); };
}

Dataset make_dataset(const VqaBundle& bundle, const std::vector<data::QARecord>& records, const FrameLoader& load) {
  const auto& cfg = bundle.model.cfg;
  Dataset d;
  d.images.resize(bundle.model.image_size(), static_cast<Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    d.answers.push_back(bundle.answers.index(r.answer));
    auto q = bundle.questions.encode(r.question);
    if (q.empty()) throw EmptyQuestion("record " + r.frame_id + " has an empty question");
    d.questions.push_back(std::move(q));
    d.images.col(static_cast<Index>(i)) = frame_input(cfg, load(r));
  }
  return d;
}

std::vector<EpochStats> train_vqa(VqaBundle& bundle, const Dataset& data, int epochs, std::uint64_t seed,
                                  const std::function<void(const EpochStats&)>& on_epoch) {
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  std::vector<EpochStats> log;
  if (epochs == 0) return log;
  if (data.size() == 0) throw InvalidArgument("training set is empty");
  auto& model = bundle.model;
  const auto& cfg = model.cfg;
  auto params = model.parameters();
  VqaModel<float> grad = zeros_like(model);
  auto grads = grad.parameters();
  nn::Adam<float> opt(params, {.lr = cfg.learning_rate});
  nn::Rng shuffle_rng(seed, 0x5f1);
  nn::Rng dropout_rng(seed, 0xd0);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const auto b = static_cast<Index>(end - start);
      nn::MatrixF images(data.images.rows(), b);
      std::vector<std::vector<Index>> qs;
      std::vector<Index> targets;
      for (std::size_t j = start; j < end; ++j) {
        images.col(static_cast<Index>(j - start)) = data.images.col(static_cast<Index>(order[j]));
        qs.push_back(data.questions[order[j]]);
        targets.push_back(data.answers[order[j]]);
      }
      const TokenBatch tb = TokenBatch::from(qs);
      VqaTrace<float> tr;
      const nn::MatrixF probs = forward(model, images, tb, nn::Mode::train, &dropout_rng, &tr);
      loss_sum += nn::cross_entropy(probs, std::span<const Index>(targets));
      for (Index n = 0; n < b; ++n) {
        Index arg;
        probs.col(n).maxCoeff(&arg);
        correct += arg == targets[static_cast<std::size_t>(n)];
      }
      ++batches;
      nn::fill_zero(grads);
      backward(model, tb, tr, nn::softmax_cross_entropy_backward(probs, std::span<const Index>(targets)), grad);
      opt.step(params, grads);
    }
    EpochStats st{epoch, loss_sum / static_cast<double>(batches),
                  static_cast<double>(correct) / static_cast<double>(data.size())};
    log.push_back(st);
    if (on_epoch) on_epoch(st);
  }
  return log;
}

nn::MatrixF predict_all(const VqaBundle& bundle, const Dataset& data, std::size_t batch) {
  nn::MatrixF out(bundle.model.cfg.answer_count, static_cast<Index>(data.size()));
  for (std::size_t start = 0; start < data.size(); start += batch) {
    const std::size_t end = std::min(data.size(), start + batch);
    const auto b = static_cast<Index>(end - start);
    std::vector<std::vector<Index>> qs(data.questions.begin() + static_cast<std::ptrdiff_t>(start),
                                       data.questions.begin() + static_cast<std::ptrdiff_t>(end));
    out.middleCols(static_cast<Index>(start), b) =
        forward(bundle.model, nn::MatrixF(data.images.middleCols(static_cast<Index>(start), b)), TokenBatch::from(qs),
                nn::Mode::eval, nullptr);
  }
  return out;
}

double accuracy(const VqaBundle& bundle, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const nn::MatrixF probs = predict_all(bundle, data);
  std::size_t correct = 0;
  for (Index n = 0; n < probs.cols(); ++n) {
    Index arg;
    probs.col(n).maxCoeff(&arg);
    correct += arg == data.answers[static_cast<std::size_t>(n)];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace xdrive::vqa
