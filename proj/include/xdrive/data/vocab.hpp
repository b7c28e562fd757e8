#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xdrive/nn/tensor.hpp"

namespace xdrive::data {

struct QARecord;

// Lowercase, drop punctuation other than hyphens, split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

class QuestionVocab {
 public:
  static constexpr nn::Index kPad = 0;
  static constexpr nn::Index kUnknown = 1;

  QuestionVocab();
  // Tokens in first-seen order after the two reserved entries.
  explicit QuestionVocab(const std::vector<std::string>& tokens);

  void add(const std::string& token);
  nn::Index index(const std::string& token) const;
  std::vector<nn::Index> encode(std::string_view question) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  nn::Index size() const { return static_cast<nn::Index>(tokens_.size()); }
  bool operator==(const QuestionVocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, nn::Index> index_;
};

class AnswerVocab {
 public:
  AnswerVocab() = default;
  // Duplicates are dropped, first occurrence wins.
  explicit AnswerVocab(const std::vector<std::string>& answers);

  std::optional<nn::Index> find(std::string_view answer) const;
  nn::Index index(std::string_view answer) const;  // throws UnknownAnswer
  const std::string& at(nn::Index i) const { return answers_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& answers() const { return answers_; }
  nn::Index size() const { return static_cast<nn::Index>(answers_.size()); }
  bool operator==(const AnswerVocab& o) const { return answers_ == o.answers_; }

 private:
  std::vector<std::string> answers_;
  std::map<std::string, nn::Index, std::less<>> index_;
};

// Question tokens from the five template questions and every manifest
// question; answers = distractors followed by the five template answers.
std::pair<QuestionVocab, AnswerVocab> build_vocabs(const std::vector<QARecord>& records,
                                                   const std::vector<std::string>& distractors);

// One answer per non-empty line.
std::vector<std::string> load_distractors(const std::filesystem::path& path);
std::filesystem::path default_distractor_path();
// Deterministic filler sentences for larger candidate sets (e.g. 1000).
std::vector<std::string> synthesize_distractors(const std::vector<std::string>& base, std::size_t count);

}  // namespace xdrive::data
