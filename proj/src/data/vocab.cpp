#include "xdrive/data/vocab.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "xdrive/data/manifest.hpp"
#include "xdrive/data/qa.hpp"
#include "xdrive/errors.hpp"

namespace xdrive::data {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else if (std::isalnum(c) || ch == '-' || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

QuestionVocab::QuestionVocab() : tokens_{"<pad>", "<unk>"} {
  index_["<pad>"] = kPad;
  index_["<unk>"] = kUnknown;
}

QuestionVocab::QuestionVocab(const std::vector<std::string>& tokens) : QuestionVocab() {
  for (const auto& t : tokens) add(t);
}

void QuestionVocab::add(const std::string& token) {
  if (index_.count(token)) return;
  index_[token] = size();
  tokens_.push_back(token);
}

nn::Index QuestionVocab::index(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<nn::Index> QuestionVocab::encode(std::string_view question) const {
  std::vector<nn::Index> ids;
  for (const auto& t : tokenize(question)) ids.push_back(index(t));
  return ids;
}

AnswerVocab::AnswerVocab(const std::vector<std::string>& answers) {
  for (const auto& a : answers) {
    if (index_.count(a)) continue;
    index_.emplace(a, static_cast<nn::Index>(answers_.size()));
    answers_.push_back(a);
  }
}

std::optional<nn::Index> AnswerVocab::find(std::string_view answer) const {
  const auto it = index_.find(answer);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

nn::Index AnswerVocab::index(std::string_view answer) const {
  if (auto i = find(answer)) return *i;
  throw UnknownAnswer("answer not in vocabulary: '" + std::string(answer) + "'");
}

std::pair<QuestionVocab, AnswerVocab> build_vocabs(const std::vector<QARecord>& records,
                                                   const std::vector<std::string>& distractors) {
  QuestionVocab q;
  for (const auto& t : qa_templates())
    for (const auto& tok : tokenize(t.question)) q.add(tok);
  for (const auto& r : records)
    for (const auto& tok : tokenize(r.question)) q.add(tok);
  std::vector<std::string> answers = distractors;
  for (const auto& t : qa_templates()) answers.emplace_back(t.answer);
  return {std::move(q), AnswerVocab(answers)};
}

std::vector<std::string> load_distractors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open distractor list '" + path.string() + "'");
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::filesystem::path default_distractor_path() {
  if (const char* env = std::getenv("XDRIVE_DATA_DIR")) return std::filesystem::path(env) / "distractors.txt";
  return std::filesystem::path(XDRIVE_DATA_DIR) / "distractors.txt";
}

std::vector<std::string> synthesize_distractors(const std::vector<std::string>& base, std::size_t count) {
  static const char* const kQualifiers[] = {"", " ahead", " nearby", " on the left", " on the right",
                                            " behind the car", " at the corner", " in the next lane",
                                            " at the junction", " down the road", " near the curb"};
  std::vector<std::string> out;
  for (std::size_t round = 0; out.size() < count && !base.empty(); ++round) {
    const std::string qualifier = kQualifiers[round % std::size(kQualifiers)];
    const std::string suffix = round < std::size(kQualifiers) ? "" : " (" + std::to_string(round) + ")";
    for (const auto& b : base) {
      if (out.size() >= count) break;
      std::string s = b;
      const std::size_t cut = !s.empty() && s.back() == '.' ? s.size() - 1 : s.size();
      s.insert(cut, qualifier + suffix);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace xdrive::data
