#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xdrive/errors.hpp"
#include "xdrive/sim/track.hpp"

namespace xdrive::sim {
namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, int line_no) {
  std::string_view s = tok;
  double scale = 1.0;
  if (s.size() > 3 && s.substr(s.size() - 3) == "deg") {
    s.remove_suffix(3);
    scale = std::numbers::pi / 180.0;
  }
  // strtod rather than from_chars: accepts the same syntax on every libstdc++.
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v))
    throw FormatError("line " + std::to_string(line_no) + ": '" + tok + "' is not a number");
  return v * scale;
}

// key=value arguments after the positional ones.
std::map<std::string, std::string> keyed(const std::vector<std::string>& toks, std::size_t first, int line_no) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = first; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string::npos || eq == 0)
      throw FormatError("line " + std::to_string(line_no) + ": expected key=value, got '" + toks[i] + "'");
    kv[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
  }
  return kv;
}

std::string take(std::map<std::string, std::string>& kv, const std::string& key, int line_no) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("line " + std::to_string(line_no) + ": missing '" + key + "='");
  std::string v = it->second;
  kv.erase(it);
  return v;
}

void no_extra(const std::map<std::string, std::string>& kv, int line_no) {
  if (!kv.empty()) throw FormatError("line " + std::to_string(line_no) + ": unknown key '" + kv.begin()->first + "'");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("XDRIVE_DATA_DIR")) return env;
  return XDRIVE_DATA_DIR;
}

}  // namespace

TrackSpec parse_track(std::string_view text) {
  TrackSpec spec;
  bool saw_lane = false;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto toks = split_ws(raw);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];
    auto need = [&](std::size_t n) {
      if (toks.size() < n) throw FormatError("line " + std::to_string(line_no) + ": '" + kw + "' needs more fields");
    };
    if (kw == "name") {
      need(2);
      spec.name = toks[1];
    } else if (kw == "lane_width") {
      need(2);
      spec.lane_width = parse_number(toks[1], line_no);
      saw_lane = true;
    } else if (kw == "node") {
      need(5);
      spec.anchors.emplace_back(toks[1], Pose{parse_number(toks[2], line_no), parse_number(toks[3], line_no),
                                              normalize_angle(parse_number(toks[4], line_no))});
    } else if (kw == "straight" || kw == "arc-left" || kw == "arc-right") {
      need(4);
      Segment s;
      s.id = toks[1];
      s.from = toks[2];
      s.to = toks[3];
      auto kv = keyed(toks, 4, line_no);
      if (kw == "straight") {
        s.kind = SegmentKind::straight;
        s.length = parse_number(take(kv, "length", line_no), line_no);
      } else {
        s.kind = kw == "arc-left" ? SegmentKind::arc_left : SegmentKind::arc_right;
        s.radius = parse_number(take(kv, "radius", line_no), line_no);
        s.sweep = parse_number(take(kv, "sweep", line_no), line_no);
      }
      no_extra(kv, line_no);
      spec.segments.push_back(std::move(s));
    } else if (kw == "t-junction") {
      need(3);
      Segment s;
      s.kind = SegmentKind::t_junction;
      s.id = toks[1];
      s.from = toks[2];
      auto kv = keyed(toks, 3, line_no);
      s.approach = kv.count("approach") ? parse_number(take(kv, "approach", line_no), line_no) : 0.0;
      s.radius = parse_number(take(kv, "radius", line_no), line_no);
      s.left_to = take(kv, "left", line_no);
      s.right_to = take(kv, "right", line_no);
      no_extra(kv, line_no);
      spec.segments.push_back(std::move(s));
    } else if (kw == "obstacle") {
      need(5);
      spec.obstacles.push_back({Vec2(parse_number(toks[1], line_no), parse_number(toks[2], line_no)),
                                Vec2(parse_number(toks[3], line_no), parse_number(toks[4], line_no))});
    } else if (kw == "route") {
      need(3);
      spec.route_start = toks[1];
      spec.route_goal = toks[2];
    } else {
      throw FormatError("line " + std::to_string(line_no) + ": unknown directive '" + kw + "'");
    }
  }
  if (!saw_lane) throw FormatError("track has no lane_width");
  return spec;
}

std::string format_track(const TrackSpec& spec) {
  std::ostringstream out;
  if (!spec.name.empty()) out << "name " << spec.name << "\n";
  out << "lane_width " << num(spec.lane_width) << "\n";
  for (const auto& [id, p] : spec.anchors) out << "node " << id << " " << num(p.x) << " " << num(p.y) << " " << num(p.yaw) << "\n";
  for (const auto& s : spec.segments) {
    switch (s.kind) {
      case SegmentKind::straight:
        out << "straight " << s.id << " " << s.from << " " << s.to << " length=" << num(s.length) << "\n";
        break;
      case SegmentKind::arc_left:
      case SegmentKind::arc_right:
        out << to_string(s.kind) << " " << s.id << " " << s.from << " " << s.to << " radius=" << num(s.radius)
            << " sweep=" << num(s.sweep) << "\n";
        break;
      case SegmentKind::t_junction:
        out << "t-junction " << s.id << " " << s.from << " approach=" << num(s.approach) << " radius=" << num(s.radius)
            << " left=" << s.left_to << " right=" << s.right_to << "\n";
        break;
    }
  }
  for (const auto& o : spec.obstacles)
    out << "obstacle " << num(o.lo.x()) << " " << num(o.lo.y()) << " " << num(o.hi.x()) << " " << num(o.hi.y()) << "\n";
  if (!spec.route_start.empty()) out << "route " << spec.route_start << " " << spec.route_goal << "\n";
  return out.str();
}

TrackSpec load_track_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open track file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_track(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::string> builtin_track_names() { return {"track-a", "track-b", "track-mini"}; }

TrackSpec builtin_track(const std::string& name) {
  for (const auto& n : builtin_track_names())
    if (n == name) return load_track_file((data_dir() / "tracks" / (name + ".track")).string());
  throw InvalidArgument("unknown built-in track '" + name + "'");
}

}  // namespace xdrive::sim
