#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "xdrive/data/qa.hpp"
#include "xdrive/data/vocab.hpp"
#include "xdrive/render/render.hpp"
#include "xdrive/vqa/evaluate.hpp"
#include "xdrive/vqa/model.hpp"
#include "xdrive/vqa/predict.hpp"
#include "xdrive/vqa/train.hpp"

using namespace xdrive;
using namespace xdrive::vqa;
using data::QARecord;
namespace fs = std::filesystem;

namespace {

VqaConfig tiny_config() {
  VqaConfig c;
  c.image_height = 16;
  c.image_width = 16;
  c.conv_channels = {4, 8};
  c.image_feature_dim = 24;
  c.fusion_dim = 16;
  c.embed_dim = 8;
  c.question_hidden = 12;
  c.classifier_hidden = 24;
  c.batch_size = 8;
  return c;
}

// Per-category image: a bright bar whose position encodes the category.
render::Frame frame_for(sim::ActionCategory c, int variant) {
  render::Frame f = render::Frame::blank(16, 16, 1);
  nn::Rng rng(static_cast<std::uint64_t>(variant) * 31 + 7);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.below(40));
  const int col = 2 + 3 * sim::index_of(c);
  for (int y = 0; y < 16; ++y) f.pixels[f.index(col, y)] = 255;
  return f;
}

std::vector<QARecord> records(int per_category) {
  std::vector<QARecord> out;
  for (auto c : sim::kAllCategories)
    for (int i = 0; i < per_category; ++i) {
      const auto& t = data::qa_for(c);
      out.push_back({std::string(sim::to_string(c)) + "-" + std::to_string(i), "", c, std::string(t.question),
                     std::string(t.answer), "track-a", data::Split::train});
    }
  return out;
}

FrameLoader loader() {
  return [](const QARecord& r) {
    return frame_for(r.category, std::stoi(r.frame_id.substr(r.frame_id.rfind('-') + 1)));
  };
}

VqaBundle tiny_bundle(std::uint64_t seed, std::size_t distractors = 15) {
  std::vector<std::string> extra;
  for (std::size_t i = 0; i < distractors; ++i) extra.push_back("Distractor sentence " + std::to_string(i) + ".");
  auto [q, a] = data::build_vocabs(records(1), extra);
  return make_bundle(tiny_config(), q, a, seed);
}

VqaModel<double> to_double(VqaModel<float>& m) {
  VqaConfig c = m.cfg;
  VqaModel<double> d(c);
  auto src = m.parameters();
  auto dst = d.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i].map() = src[i].map().cast<double>();
  return d;
}

class TableAnswerer : public Answerer {
 public:
  explicit TableAnswerer(std::vector<Answer> table) : table_(std::move(table)) {}
  Answer answer(const QARecord&) override { return table_.at(next_++); }

 private:
  std::vector<Answer> table_;
  std::size_t next_ = 0;
};

}  // namespace

TEST_CASE("fuse") {
  nn::Rng rng(1);
  const nn::MatrixD a = testing::random_matrix(6, 3, rng), b = testing::random_matrix(6, 3, rng);
  CHECK(fuse(a, nn::MatrixD::Ones(6, 3)) == a);
  CHECK(fuse(nn::MatrixD::Zero(6, 3), b).isZero(0.0));
  CHECK(fuse(a, b) == fuse(b, a));
  Eigen::Vector3d x(1, 2, 3), y(4, 5, 6);
  CHECK(fuse(x, y) == Eigen::Vector3d(4, 10, 18));
  CHECK_THROWS_AS(fuse(a, nn::MatrixD::Ones(5, 3)), ShapeMismatch);
}

TEST_CASE("zero weights give a uniform answer distribution") {
  VqaBundle b = tiny_bundle(2);
  for (const auto& p : b.model.parameters()) p.map().setZero();
  const auto p = predict_topk(b, frame_for(sim::ActionCategory::turn_left, 0), "Why is the car turning to the left?",
                              static_cast<std::size_t>(b.answers.size()));
  for (double x : p.distribution) CHECK(x == doctest::Approx(1.0 / 20).epsilon(1e-6));
  // and zero images encode to zero
  const nn::MatrixF img = nn::MatrixF::Zero(b.model.image_size(), 2);
  CHECK(encode_images(b.model, img).isZero(0.0f));
}

TEST_CASE("encoders and eval-mode prediction are pure") {
  VqaBundle b = tiny_bundle(3);
  const auto f = frame_for(sim::ActionCategory::go_straight, 1);
  const auto p1 = predict_topk(b, f, "Why is the car going straight?", 20);
  const auto p2 = predict_topk(b, f, "Why is the car going straight?", 20);
  CHECK(p1.distribution == p2.distribution);
  CHECK(std::accumulate(p1.distribution.begin(), p1.distribution.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));

  const auto tb = TokenBatch::from({b.questions.encode("Why is the car turning to the left?"),
                                    b.questions.encode("Why is the car turning to the right?"),
                                    b.questions.encode("Why is the car turning to the left?"),
                                    b.questions.encode("zebra quokka")});
  const nn::MatrixF vq = encode_questions(b.model, tb);
  CHECK(vq.col(0) == vq.col(2));
  CHECK(vq.col(0) != vq.col(1));
  CHECK(vq.col(3).allFinite());
  CHECK_THROWS_AS(predict_topk(b, f, "  ?! ", 5), EmptyQuestion);
}

TEST_CASE("distributions sum to one for arbitrary inputs") {
  VqaBundle b = tiny_bundle(4);
  nn::Rng rng(5);
  nn::MatrixF imgs(b.model.image_size(), 6);
  for (nn::Index i = 0; i < imgs.size(); ++i) imgs.data()[i] = static_cast<float>(rng.uniform());
  std::vector<std::vector<Index>> qs;
  for (int i = 0; i < 6; ++i) {
    std::vector<Index> q;
    for (int t = 0; t < 1 + i; ++t) q.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(b.questions.size()))));
    qs.push_back(q);
  }
  const nn::MatrixF p = forward(b.model, imgs, TokenBatch::from(qs), nn::Mode::eval, nullptr);
  for (nn::Index n = 0; n < p.cols(); ++n) CHECK(std::abs(p.col(n).cast<double>().sum() - 1.0) < 1e-6);
  CHECK((p.array() > 0.0f).all());
}

TEST_CASE("rank_answers") {
  data::AnswerVocab v({"a", "b", "c", "d"});
  nn::VectorF probs(4);
  probs << 0.1f, 0.4f, 0.1f, 0.4f;
  const auto all = rank_answers(v, probs, 4);
  REQUIRE(all.ranked.size() == 4);
  CHECK(all.ranked[0].index == 1);  // tie broken towards the lower index
  CHECK(all.ranked[1].index == 3);
  CHECK(all.ranked[2].index == 0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(all.ranked[i - 1].prob >= all.ranked[i].prob);
  CHECK(rank_answers(v, probs, 1).chosen().text == "b");
  CHECK_THROWS_AS(rank_answers(v, probs, 0), InvalidArgument);
  CHECK_THROWS_AS(rank_answers(v, probs, 5), InvalidArgument);

  nn::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    nn::VectorF z(4);
    for (int i = 0; i < 4; ++i) z(i) = static_cast<float>(rng.normal());
    const nn::VectorF p = nn::softmax(z);
    Index arg;
    p.maxCoeff(&arg);
    const auto r = rank_answers(v, p, 3);
    CHECK(r.chosen().index == arg);
    for (const auto& e : r.ranked) CHECK(e.prob == static_cast<double>(p(e.index)));
  }

  const auto j = answers_json(rank_answers(v, probs, 2));
  CHECK(j["answers"].size() == 2);
  CHECK(j["answers"][0]["text"] == "b");
}

TEST_CASE("training") {
  SUBCASE("zero epochs leaves the initial weights") {
    VqaBundle b = tiny_bundle(7);
    const VqaBundle fresh = tiny_bundle(7);
    const auto data = make_dataset(b, records(2), loader());
    CHECK(train_vqa(b, data, 0, 1).empty());
    auto p = b.model.parameters();
    auto q = const_cast<VqaModel<float>&>(fresh.model).parameters();
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i].map() == q[i].map());
  }
  SUBCASE("a single record is memorized") {
    auto [q, a] = data::build_vocabs(records(1), data::load_distractors(data::default_distractor_path()));
    VqaBundle b = make_bundle(VqaConfig::desk(), q, a, 8);
    auto one = records(1);
    one.resize(1);
    const auto data = make_dataset(b, one, [](const QARecord&) {
      const sim::Track t(sim::builtin_track("track-a"));
      return render::render_frame(t, sim::make_pose(10, 0, 0));
    });
    const auto log = train_vqa(b, data, 200, 2);
    REQUIRE(log.size() == 200);
    CHECK(log.back().loss < 0.01);
    CHECK(accuracy(b, data) == 1.0);
  }
  SUBCASE("the small synthetic corpus is learned, reproducibly") {
    VqaBundle a = tiny_bundle(9), c = tiny_bundle(9);
    const auto data = make_dataset(a, records(8), loader());
    const auto la = train_vqa(a, data, 25, 3), lc = train_vqa(c, data, 25, 3);
    for (std::size_t i = 0; i < la.size(); ++i) CHECK(la[i].loss == lc[i].loss);
    CHECK(accuracy(a, data) >= 0.95);
  }
  SUBCASE("unknown answers are rejected") {
    VqaBundle b = tiny_bundle(10);
    auto rs = records(1);
    rs[0].answer = "Because I said so.";
    CHECK_THROWS_AS(make_dataset(b, rs, loader()), UnknownAnswer);
  }
}

TEST_CASE("permuting the answer vocabulary keeps the predicted string") {
  VqaBundle b = tiny_bundle(11);
  const auto data = make_dataset(b, records(6), loader());
  train_vqa(b, data, 15, 4);

  // reversed order, with the output layer rows moved to match
  std::vector<std::string> permuted(b.answers.answers().rbegin(), b.answers.answers().rend());
  VqaBundle p = b;
  p.answers = data::AnswerVocab(permuted);
  const Index k = b.answers.size();
  for (Index i = 0; i < k; ++i) {
    p.model.output.weight.row(k - 1 - i) = b.model.output.weight.row(i);
    p.model.output.bias(k - 1 - i) = b.model.output.bias(i);
  }
  for (const auto& r : records(3)) {
    const auto f = loader()(r);
    CHECK(predict_topk(b, f, r.question, 1).chosen().text == predict_topk(p, f, r.question, 1).chosen().text);
  }
}

TEST_CASE("bundle round-trip") {
  const auto dir = fs::temp_directory_path() / "xdrive_vqa_test";
  fs::create_directories(dir);
  VqaBundle b = tiny_bundle(12);
  save_bundle(dir / "m.ckpt", b);
  CHECK(fs::exists(meta_path(dir / "m.ckpt")));
  VqaBundle back = load_bundle(dir / "m.ckpt");
  CHECK(back.model.cfg == b.model.cfg);
  CHECK(back.questions == b.questions);
  CHECK(back.answers == b.answers);
  const auto f = frame_for(sim::ActionCategory::turn_right_t, 2);
  CHECK(predict_topk(back, f, "Why is the car turning right at T-junction?", 5).distribution ==
        predict_topk(b, f, "Why is the car turning right at T-junction?", 5).distribution);
  CHECK_THROWS_AS(load_bundle(dir / "missing.ckpt"), MissingPrerequisite);
  fs::remove_all(dir);
}

TEST_CASE("whole-model gradient matches finite differences") {
  VqaConfig cfg = tiny_config();
  cfg.image_height = cfg.image_width = 6;
  cfg.conv_channels = {2};
  cfg.image_feature_dim = 5;
  cfg.fusion_dim = 4;
  cfg.embed_dim = 3;
  cfg.question_hidden = 3;
  cfg.classifier_hidden = 5;
  cfg.answer_count = 6;
  cfg.question_vocab = 7;
  VqaModel<double> m(cfg);
  nn::Rng rng(13);
  m.initialize(rng);
  for (const auto& p : m.parameters())
    for (Index i = 0; i < p.size(); ++i) p.data[i] += rng.normal(0.0, 0.1);  // non-zero biases too

  const nn::MatrixD images = testing::random_matrix(m.image_size(), 3, rng);
  const auto tb = TokenBatch::from({{2, 3, 4}, {5, 1}, {6, 2, 2, 3}});
  const Index targets[] = {1, 4, 0};
  const std::uint64_t mask_seed = rng.next_u64();
  auto loss = [&] {
    nn::Rng draw(mask_seed);
    const nn::MatrixD p = forward(m, images, tb, nn::Mode::train, &draw);
    return nn::cross_entropy(p, std::span<const Index>(targets));
  };
  nn::Rng draw(mask_seed);
  VqaTrace<double> tr;
  const nn::MatrixD p = forward(m, images, tb, nn::Mode::train, &draw, &tr);
  auto g = zeros_like(m);
  backward(m, tb, tr, nn::softmax_cross_entropy_backward(p, std::span<const Index>(targets)), g);

  // ReLU kinks make a finite difference meaningless; this seed keeps every
  // pre-activation well clear of zero
  CHECK(testing::check_params(m.parameters(), g.parameters(), loss) < 1e-4);
}

TEST_CASE("evaluation protocol") {
  const auto [q, answers] = data::build_vocabs({}, data::load_distractors(data::default_distractor_path()));
  auto test = records(20);
  for (auto& r : test) r.split = data::Split::test;

  SUBCASE("accuracy") {
    CHECK(accuracy(80, 100) == 0.8);
    CHECK_THROWS_AS(accuracy(0, 0), InvalidArgument);
  }
  SUBCASE("oracle") {
    OracleAnswerer oracle(answers);
    const Report r = evaluate(test, answers, oracle);
    CHECK(r.accuracy == 1.0);
    CHECK(r.total == 100);
    for (const auto& row : r.rows) {
      CHECK(row.correct == 20);
      CHECK(row.total == 20);
      CHECK(row.mean_top1 == 1.0);
    }
  }
  SUBCASE("uniform random answers") {
    std::vector<QARecord> many;
    for (int i = 0; i < 100; ++i) many.insert(many.end(), test.begin(), test.end());
    RandomAnswerer random(answers.size(), 14);
    const Report r = evaluate(many, answers, random);
    const double n = static_cast<double>(r.total), p = 1.0 / answers.size();
    CHECK(std::abs(static_cast<double>(r.correct) - n * p) <= 3.0 * std::sqrt(n * p * (1 - p)));
  }
  SUBCASE("report totals agree with a brute-force count") {
    nn::Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Answer> table;
      std::size_t correct = 0;
      std::array<std::size_t, 5> per{};
      for (const auto& rec : test) {
        const bool right = rng.bernoulli(0.7);
        const Index idx = right ? answers.index(rec.answer) : static_cast<Index>(rng.below(95));
        table.push_back({idx, rng.uniform()});
        if (answers.at(idx) == rec.answer) ++correct, ++per[static_cast<std::size_t>(sim::index_of(rec.category))];
      }
      TableAnswerer stub(table);
      const Report r = evaluate(test, answers, stub);
      CHECK(r.correct == correct);
      CHECK(r.accuracy == static_cast<double>(correct) / 100.0);
      std::size_t sum = 0, cells = 0;
      for (std::size_t c = 0; c < 5; ++c) {
        CHECK(r.rows[c].correct == per[c]);
        sum += r.rows[c].correct;
        for (auto x : r.confusion[c]) cells += x;
        CHECK(r.confusion[c][c] == per[c]);
      }
      CHECK(sum == r.correct);
      CHECK(cells == r.total);
    }
  }
  SUBCASE("formatted report") {
    OracleAnswerer oracle(answers);
    const Report r = evaluate(test, answers, oracle);
    const std::string text = format_report(r);
    CHECK(text.find("100/100") != std::string::npos);
    CHECK(text.find("turn_right_t") != std::string::npos);
    CHECK(to_json(r)["total"] == 100);
    CHECK_THROWS_AS(evaluate({}, answers, oracle), InvalidArgument);
  }
}
