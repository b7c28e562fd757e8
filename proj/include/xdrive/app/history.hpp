#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xdrive/sim/track.hpp"
#include "xdrive/vqa/predict.hpp"

namespace xdrive::app {

struct QAHistoryEntry {
  double timestamp = 0.0;  // seconds since the epoch
  std::string frame_id;
  std::optional<sim::ActionCategory> category;
  std::string question;
  std::vector<vqa::RankedAnswer> answers;
  std::string chosen;
};

nlohmann::ordered_json to_json(const QAHistoryEntry& e);
QAHistoryEntry history_entry_from_json(const nlohmann::json& j);

// Append-only log mirrored to a line-delimited file. Timestamps are forced
// to be non-decreasing.
class HistoryLog {
 public:
  HistoryLog() = default;
  // Loads any existing entries, then appends to the same file.
  explicit HistoryLog(std::filesystem::path path);

  QAHistoryEntry append(QAHistoryEntry entry);
  std::vector<QAHistoryEntry> entries() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::optional<std::filesystem::path> path_;
  std::vector<QAHistoryEntry> entries_;
};

std::vector<QAHistoryEntry> read_history(const std::filesystem::path& path);
double now_seconds();

}  // namespace xdrive::app
