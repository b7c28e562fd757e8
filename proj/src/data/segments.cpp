#include "xdrive/data/segments.hpp"

namespace xdrive::data {

std::vector<CategorySegment> extract_segments(const std::vector<sim::ActionCategory>& labels,
                                              std::size_t min_length) {
  std::vector<CategorySegment> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i < labels.size() && labels[i] == labels[begin]) continue;
    if (i - begin >= min_length) out.push_back({labels[begin], begin, i});
    begin = i;
  }
  return out;
}

}  // namespace xdrive::data
