#include "xdrive/data/manifest.hpp"

#include <fstream>

#include "json.hpp"

#include "xdrive/errors.hpp"

namespace xdrive::data {

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw FormatError("unknown split '" + std::string(s) + "'");
}

std::string to_json_line(const QARecord& r) {
  nlohmann::ordered_json j;
  j["frame_id"] = r.frame_id;
  j["frame_path"] = r.frame_path;
  j["category"] = sim::to_string(r.category);
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["track_id"] = r.track_id;
  j["split"] = to_string(r.split);
  return j.dump();
}

QARecord parse_record(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    QARecord r;
    r.frame_id = j.at("frame_id").get<std::string>();
    r.frame_path = j.at("frame_path").get<std::string>();
    const auto cat = j.at("category").get<std::string>();
    const auto parsed = sim::parse_category(cat);
    if (!parsed) throw FormatError("unknown category '" + cat + "'");
    r.category = *parsed;
    r.question = j.at("question").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    r.track_id = j.at("track_id").get<std::string>();
    r.split = parse_split(j.at("split").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad manifest record: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const std::vector<QARecord>& records) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) out << to_json_line(r) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<QARecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrerequisite("manifest not found: " + path.string());
  std::vector<QARecord> out;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<QARecord> filter_split(const std::vector<QARecord>& records, Split split) {
  std::vector<QARecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

std::filesystem::path resolve_frame(const std::filesystem::path& manifest_path, const QARecord& r) {
  const std::filesystem::path p(r.frame_path);
  return p.is_absolute() ? p : manifest_path.parent_path() / p;
}

}  // namespace xdrive::data
