#include "xdrive/data/record.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "xdrive/errors.hpp"

namespace xdrive::data {

std::vector<sim::ActionCategory> Recording::categories() const {
  std::vector<sim::ActionCategory> out;
  out.reserve(log.size());
  for (const auto& e : log) out.push_back(e.category);
  return out;
}

namespace {

std::string make_id(const std::string& prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%06zu", k);
  return prefix + buf;
}

sim::Pose lerp(const sim::Pose& a, const sim::Pose& b, double f) {
  const double dyaw = sim::normalize_angle(b.yaw - a.yaw);
  return sim::make_pose(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.yaw + f * dyaw);
}

}  // namespace

Recording record_drive(const sim::DrivingEnv& env, const rl::Policy& policy, const RecordOptions& opts) {
  if (!(opts.fps > 0.0)) throw InvalidConfig("fps must be positive");
  const double dt = env.config().dt;

  // drive first, then sample frames from the state sequence
  std::vector<sim::EgoState> states{env.initial_state()};
  sim::Episode episode(env);
  episode.reset(states.front());
  std::optional<double> failure_time;
  while (!episode.finished()) {
    if (opts.duration && episode.state().time >= *opts.duration - 1e-9) break;
    const auto out = episode.step(policy(episode.state()).clamped());
    states.push_back(out.next_state);
    if (out.event == sim::Event::collision || out.event == sim::Event::lane_departure) failure_time = out.next_state.time;
  }

  Recording rec;
  rec.track_id = env.track().name();
  rec.termination = episode.termination();
  if (failure_time && opts.require_t_junction) {
    bool reached = false;
    for (const auto& s : states)
      reached = reached || env.route().tag_at(s.s).kind == sim::SegmentKind::t_junction;
    if (!reached)
      throw RolloutFailed("drive ended in " + std::string(sim::to_string(rec.termination)) + " at t=" +
                          std::to_string(*failure_time) + " before reaching a T-junction");
  }

  const std::string prefix = opts.id_prefix.empty() ? env.track().name() : opts.id_prefix;
  const double t_end = states.back().time;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / opts.fps;
    if (t >= t_end - 1e-9) break;
    const auto i = std::min(static_cast<std::size_t>(std::floor(t / dt + 1e-9)), states.size() - 2);
    const double f = std::clamp((t - states[i].time) / dt, 0.0, 1.0);
    const double v = states[i].v + f * (states[i + 1].v - states[i].v);
    const sim::EgoState st = env.locate(lerp(states[i].pose, states[i + 1].pose, f), v, states[i].s, t);

    FrameLogEntry e;
    e.index = k;
    e.frame_id = make_id(prefix, k);
    e.sim_time = t;
    e.category = sim::action_category(env.route(), st.route_progress, st);
    e.state = st;
    e.usable = !failure_time || t < *failure_time - opts.quality_guard_steps * dt - 1e-9;

    render::Frame frame = render::render_frame(env.track(), st, opts.render);
    frame.meta = {e.frame_id, t, e.category};
    if (opts.on_frame) opts.on_frame(frame);
    if (opts.keep_frames) rec.frames.push_back(std::move(frame));
    rec.log.push_back(std::move(e));
  }
  return rec;
}

std::filesystem::path frame_path(const std::filesystem::path& dir, const std::string& frame_id) {
  return dir / "frames" / (frame_id + ".png");
}

void write_recording(const Recording& rec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  for (const auto& f : rec.frames) render::write_frame(f, frame_path(dir, f.meta.frame_id));
  std::ofstream out(dir / "log.jsonl", std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "log.jsonl").string());
  for (const auto& e : rec.log) {
    nlohmann::ordered_json j;
    j["index"] = e.index;
    j["frame_id"] = e.frame_id;
    j["track_id"] = rec.track_id;
    j["sim_time"] = e.sim_time;
    j["category"] = sim::to_string(e.category);
    j["usable"] = e.usable;
    j["x"] = e.state.pose.x;
    j["y"] = e.state.pose.y;
    j["yaw"] = e.state.pose.yaw;
    j["v"] = e.state.v;
    j["d"] = e.state.d;
    j["phi"] = e.state.phi;
    j["s"] = e.state.s;
    j["route_progress"] = e.state.route_progress;
    out << j.dump() << "\n";
  }
  nlohmann::ordered_json summary;
  summary["track_id"] = rec.track_id;
  summary["frames"] = rec.log.size();
  summary["termination"] = sim::to_string(rec.termination);
  std::ofstream(dir / "recording.json", std::ios::trunc) << summary.dump(2) << "\n";
}

Recording read_recording_log(const std::filesystem::path& dir) {
  std::ifstream in(dir / "log.jsonl", std::ios::binary);
  if (!in) throw MissingPrerequisite("recording log not found: " + (dir / "log.jsonl").string());
  Recording rec;
  try {
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      FrameLogEntry e;
      e.index = j.at("index").get<std::size_t>();
      e.frame_id = j.at("frame_id").get<std::string>();
      rec.track_id = j.at("track_id").get<std::string>();
      e.sim_time = j.at("sim_time").get<double>();
      const auto cat = sim::parse_category(j.at("category").get<std::string>());
      if (!cat) throw FormatError("unknown category in recording log");
      e.category = *cat;
      e.usable = j.at("usable").get<bool>();
      e.state.pose = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("yaw").get<double>()};
      e.state.v = j.at("v").get<double>();
      e.state.d = j.at("d").get<double>();
      e.state.phi = j.at("phi").get<double>();
      e.state.s = j.at("s").get<double>();
      e.state.route_progress = j.at("route_progress").get<std::size_t>();
      e.state.time = e.sim_time;
      rec.log.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad recording log: ") + ex.what());
  }
  std::ifstream summary(dir / "recording.json");
  if (summary) {
    try {
      const auto j = nlohmann::json::parse(summary);
      const auto term = j.at("termination").get<std::string>();
      for (auto t : {sim::Termination::lane_departure, sim::Termination::collision, sim::Termination::goal_reached,
                     sim::Termination::max_steps})
        if (sim::to_string(t) == term) rec.termination = t;
    } catch (const nlohmann::json::exception&) {
    }
  }
  return rec;
}

std::size_t apply_overrides(Recording& rec, const std::filesystem::path& overrides, bool allow_foreign) {
  std::ifstream in(overrides);
  if (!in) throw IoError("cannot open overrides file '" + overrides.string() + "'");
  std::size_t changed = 0;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    std::string id, cat_name;
    if (!(ss >> id)) continue;
    if (!(ss >> cat_name)) throw FormatError("overrides line " + std::to_string(line_no) + ": missing category");
    const auto cat = sim::parse_category(cat_name);
    if (!cat) throw FormatError("overrides line " + std::to_string(line_no) + ": unknown category '" + cat_name + "'");
    bool found = false;
    for (std::size_t i = 0; i < rec.log.size(); ++i) {
      if (rec.log[i].frame_id != id) continue;
      found = true;
      if (rec.log[i].category != *cat) ++changed;
      rec.log[i].category = *cat;
      if (i < rec.frames.size()) rec.frames[i].meta.category = *cat;
    }
    if (!found && !allow_foreign) throw InvalidArgument("overrides line " + std::to_string(line_no) + ": unknown frame '" + id + "'");
  }
  return changed;
}

}  // namespace xdrive::data
