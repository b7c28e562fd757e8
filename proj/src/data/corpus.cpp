#include "xdrive/data/corpus.hpp"

#include <cmath>

#include "xdrive/data/qa.hpp"
#include "xdrive/data/segments.hpp"
#include "xdrive/errors.hpp"

namespace xdrive::data {
namespace {

Candidate candidate_of(const Recording& rec, const FrameLogEntry& e, const std::string& frame_dir) {
  return {e.frame_id, frame_dir + "/frames/" + e.frame_id + ".png", rec.track_id, e.category};
}

}  // namespace

std::vector<Candidate> candidates(const Recording& rec, const std::string& frame_dir, std::size_t min_segment) {
  std::vector<Candidate> out;
  for (const auto& seg : extract_segments(rec.categories(), min_segment))
    for (std::size_t i = seg.begin; i < seg.end; ++i)
      if (rec.log[i].usable) out.push_back(candidate_of(rec, rec.log[i], frame_dir));
  return out;
}

PoolSplit partition(const Recording& rec, const std::string& frame_dir, const CorpusConfig& cfg) {
  if (cfg.train_fraction < 0.0 || cfg.heldout_fraction < 0.0 || cfg.train_fraction + cfg.heldout_fraction > 1.0)
    throw InvalidConfig("train and held-out fractions must be non-negative and sum to at most 1");
  PoolSplit out;
  for (const auto& seg : extract_segments(rec.categories(), cfg.min_segment)) {
    const auto n = static_cast<double>(seg.size());
    const std::size_t train_end = seg.begin + static_cast<std::size_t>(std::floor(n * cfg.train_fraction));
    const std::size_t test_begin = seg.end - static_cast<std::size_t>(std::floor(n * cfg.heldout_fraction));
    for (std::size_t i = seg.begin; i < seg.end; ++i) {
      if (!rec.log[i].usable) continue;
      if (i < train_end) out.train.push_back(candidate_of(rec, rec.log[i], frame_dir));
      else if (i >= test_begin) out.heldout.push_back(candidate_of(rec, rec.log[i], frame_dir));
    }
  }
  return out;
}

std::vector<QARecord> build_corpus(const std::vector<Candidate>& pool, int per_category, Split split) {
  if (per_category < 0) throw InvalidArgument("per_category must be >= 0");
  std::vector<QARecord> out;
  for (auto cat : sim::kAllCategories) {
    std::vector<const Candidate*> mine;
    for (const auto& c : pool)
      if (c.category == cat) mine.push_back(&c);
    const auto k = static_cast<std::size_t>(per_category);
    if (mine.size() < k)
      throw InsufficientFrames("category " + std::string(sim::to_string(cat)) + " has " +
                               std::to_string(mine.size()) + " frames, needs " + std::to_string(k));
    const auto& qa = qa_for(cat);
    for (std::size_t i = 0; i < k; ++i) {
      const Candidate& c = *mine[(2 * i + 1) * mine.size() / (2 * k)];
      out.push_back({c.frame_id, c.frame_path, cat, std::string(qa.question), std::string(qa.answer), c.track_id, split});
    }
  }
  return out;
}

std::vector<QARecord> Corpus::all() const {
  std::vector<QARecord> out = train;
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

Corpus build_desk_corpus(const Recording& train_track, const std::string& train_dir, const Recording& test_track,
                         const std::string& test_dir, const CorpusConfig& cfg) {
  const PoolSplit pools = partition(train_track, train_dir, cfg);
  const int second = static_cast<int>(std::lround(cfg.test_per_category * cfg.test_second_track_share));
  const int first = cfg.test_per_category - second;
  Corpus corpus;
  corpus.train = build_corpus(pools.train, cfg.train_per_category, Split::train);
  const auto held = build_corpus(pools.heldout, first, Split::test);
  const auto other = build_corpus(candidates(test_track, test_dir, cfg.min_segment), second, Split::test);
  // interleave per category so the test manifest stays grouped by category
  for (auto cat : sim::kAllCategories) {
    for (const auto& r : held)
      if (r.category == cat) corpus.test.push_back(r);
    for (const auto& r : other)
      if (r.category == cat) corpus.test.push_back(r);
  }
  return corpus;
}

}  // namespace xdrive::data
