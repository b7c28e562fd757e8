#include "xdrive/vqa/evaluate.hpp"

#include <cstdio>

#include "xdrive/data/qa.hpp"
#include "xdrive/errors.hpp"

namespace xdrive::vqa {

Answer ModelAnswerer::answer(const data::QARecord& record) {
  const auto p = predict_topk(*bundle_, load_(record), record.question, 1);
  return {p.chosen().index, p.chosen().prob};
}

Answer OracleAnswerer::answer(const data::QARecord& record) { return {answers_->index(record.answer), 1.0}; }

Answer RandomAnswerer::answer(const data::QARecord&) {
  return {static_cast<Index>(rng_.below(static_cast<std::uint64_t>(k_))), 1.0 / static_cast<double>(k_)};
}

double accuracy(std::size_t correct, std::size_t total) {
  if (total == 0) throw InvalidArgument("accuracy of an empty set");
  return static_cast<double>(correct) / static_cast<double>(total);
}

Report evaluate(const std::vector<data::QARecord>& records, const data::AnswerVocab& answers, Answerer& answerer) {
  if (records.empty()) throw InvalidArgument("test split is empty");
  Report r;
  for (auto c : sim::kAllCategories) r.rows[static_cast<std::size_t>(sim::index_of(c))].category = c;
  std::array<double, sim::kCategoryCount> prob_sum{};
  for (const auto& rec : records) {
    const auto row = static_cast<std::size_t>(sim::index_of(rec.category));
    const Answer a = answerer.answer(rec);
    const std::string& text = answers.at(a.index);
    const bool ok = text == rec.answer;
    r.correct += ok;
    ++r.total;
    r.rows[row].correct += ok;
    ++r.rows[row].total;
    prob_sum[row] += a.prob;
    const auto predicted = data::category_of_answer(text);
    ++r.confusion[row][predicted ? static_cast<std::size_t>(sim::index_of(*predicted)) : kOtherColumn];
  }
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (r.rows[i].total > 0) r.rows[i].mean_top1 = prob_sum[i] / static_cast<double>(r.rows[i].total);
  r.accuracy = accuracy(r.correct, r.total);
  return r;
}

std::string format_report(const Report& r) {
  std::string out;
  char buf[256];
  auto put = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  put("accuracy %zu/%zu = %.4f\n\n", r.correct, r.total, r.accuracy);
  put("%-14s %8s %8s %10s\n", "category", "correct", "total", "mean_top1");
  for (const auto& row : r.rows)
    put("%-14s %8zu %8zu %10.4f\n", std::string(sim::to_string(row.category)).c_str(), row.correct, row.total,
        row.mean_top1);
  put("%-14s %8zu %8zu\n\n", "all", r.correct, r.total);
  put("confusion (rows: truth, columns: predicted)\n%-14s", "");
  for (auto c : sim::kAllCategories) put(" %13s", std::string(sim::to_string(c)).c_str());
  put(" %13s\n", "other");
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    put("%-14s", std::string(sim::to_string(r.rows[i].category)).c_str());
    for (auto n : r.confusion[i]) put(" %13zu", n);
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["correct"] = r.correct;
  j["total"] = r.total;
  j["accuracy"] = r.accuracy;
  auto& cats = j["categories"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows)
    cats.push_back({{"category", sim::to_string(row.category)},
                    {"correct", row.correct},
                    {"total", row.total},
                    {"mean_top1", row.mean_top1}});
  j["confusion"] = r.confusion;
  return j;
}

}  // namespace xdrive::vqa
