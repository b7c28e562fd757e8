#pragma once

#include <string>
#include <vector>

#include "xdrive/data/manifest.hpp"
#include "xdrive/data/record.hpp"

namespace xdrive::data {

struct Candidate {
  std::string frame_id;
  std::string frame_path;
  std::string track_id;
  sim::ActionCategory category = sim::ActionCategory::go_straight;
};

struct CorpusConfig {
  int train_per_category = 50;
  int test_per_category = 20;
  double test_second_track_share = 0.5;  // of test frames, drawn from the held-out track
  double train_fraction = 0.6;           // leading part of each segment used for training
  double heldout_fraction = 0.3;         // trailing part kept for testing; the middle is a guard gap
  std::size_t min_segment = 10;
};

struct PoolSplit {
  std::vector<Candidate> train;
  std::vector<Candidate> heldout;
};

// Usable frames of every qualifying segment, in log order.
std::vector<Candidate> candidates(const Recording& rec, const std::string& frame_dir, std::size_t min_segment);
// Splits each segment into a leading train part and a trailing held-out part.
PoolSplit partition(const Recording& rec, const std::string& frame_dir, const CorpusConfig& cfg);

// Evenly spaced pick of per_category frames from each category's pool,
// annotated with the category's template question and answer.
// Throws InsufficientFrames naming the first short category.
std::vector<QARecord> build_corpus(const std::vector<Candidate>& pool, int per_category, Split split);

struct Corpus {
  std::vector<QARecord> train;
  std::vector<QARecord> test;
  std::vector<QARecord> all() const;
};

// Train from the leading parts of the training-track drive; test from its
// held-out trailing parts plus the second track.
Corpus build_desk_corpus(const Recording& train_track, const std::string& train_dir, const Recording& test_track,
                         const std::string& test_dir, const CorpusConfig& cfg = {});

}  // namespace xdrive::data
