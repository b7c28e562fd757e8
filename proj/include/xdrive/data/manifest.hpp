#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "xdrive/sim/track.hpp"

namespace xdrive::data {

enum class Split { train, test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct QARecord {
  std::string frame_id;
  std::string frame_path;  // relative to the manifest's directory
  sim::ActionCategory category = sim::ActionCategory::go_straight;
  std::string question;
  std::string answer;
  std::string track_id;
  Split split = Split::train;
  bool operator==(const QARecord&) const = default;
};

// One JSON object per line, fields in QARecord order.
std::string to_json_line(const QARecord& r);
QARecord parse_record(std::string_view line);

void write_manifest(const std::filesystem::path& path, const std::vector<QARecord>& records);
std::vector<QARecord> read_manifest(const std::filesystem::path& path);

std::vector<QARecord> filter_split(const std::vector<QARecord>& records, Split split);
// Absolute frame path of a record read from `manifest_path`.
std::filesystem::path resolve_frame(const std::filesystem::path& manifest_path, const QARecord& r);

}  // namespace xdrive::data
