#include "xdrive/app/history.hpp"

#include <chrono>
#include <fstream>

#include "xdrive/errors.hpp"

namespace xdrive::app {

nlohmann::ordered_json to_json(const QAHistoryEntry& e) {
  nlohmann::ordered_json j;
  j["timestamp"] = e.timestamp;
  j["frame_id"] = e.frame_id;
  j["category"] = e.category ? nlohmann::ordered_json(sim::to_string(*e.category)) : nlohmann::ordered_json(nullptr);
  j["question"] = e.question;
  j["answers"] = nlohmann::ordered_json::array();
  for (const auto& a : e.answers) j["answers"].push_back({{"text", a.text}, {"prob", a.prob}});
  j["chosen"] = e.chosen;
  return j;
}

QAHistoryEntry history_entry_from_json(const nlohmann::json& j) {
  try {
    QAHistoryEntry e;
    e.timestamp = j.at("timestamp").get<double>();
    e.frame_id = j.at("frame_id").get<std::string>();
    if (!j.at("category").is_null()) {
      e.category = sim::parse_category(j.at("category").get<std::string>());
      if (!e.category) throw FormatError("unknown category in history entry");
    }
    e.question = j.at("question").get<std::string>();
    for (const auto& a : j.at("answers")) e.answers.push_back({a.at("text").get<std::string>(), a.at("prob").get<double>(), 0});
    e.chosen = j.at("chosen").get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad history entry: ") + ex.what());
  }
}

std::vector<QAHistoryEntry> read_history(const std::filesystem::path& path) {
  std::vector<QAHistoryEntry> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(history_entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& ex) {
      throw FormatError("bad history line in " + path.string() + ": " + ex.what());
    }
  }
  return out;
}

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

HistoryLog::HistoryLog(std::filesystem::path path) : path_(std::move(path)) {
  entries_ = read_history(*path_);
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
}

QAHistoryEntry HistoryLog::append(QAHistoryEntry entry) {
  std::lock_guard lock(mu_);
  if (!entries_.empty() && entry.timestamp < entries_.back().timestamp) entry.timestamp = entries_.back().timestamp;
  if (path_) {
    std::ofstream out(*path_, std::ios::app);
    if (!out) throw IoError("cannot append to " + path_->string());
    out << to_json(entry).dump() << "\n";
  }
  entries_.push_back(entry);
  return entry;
}

std::vector<QAHistoryEntry> HistoryLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t HistoryLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace xdrive::app
