#pragma once

#include <cstddef>
#include <vector>

#include "xdrive/sim/track.hpp"

namespace xdrive::data {

// Frames [begin, end) of one constant-category run.
struct CategorySegment {
  sim::ActionCategory category;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const CategorySegment&) const = default;
};

// Maximal runs of equal labels; runs shorter than min_length are dropped.
std::vector<CategorySegment> extract_segments(const std::vector<sim::ActionCategory>& labels,
                                              std::size_t min_length = 10);

}  // namespace xdrive::data
