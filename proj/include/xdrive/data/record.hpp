#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xdrive/render/frame.hpp"
#include "xdrive/render/render.hpp"
#include "xdrive/rl/trainer.hpp"
#include "xdrive/sim/env.hpp"

namespace xdrive::data {

struct FrameLogEntry {
  std::size_t index = 0;
  std::string frame_id;
  double sim_time = 0.0;
  sim::ActionCategory category = sim::ActionCategory::go_straight;
  sim::EgoState state;
  bool usable = true;  // false near a departure or collision
};

struct Recording {
  std::string track_id;
  std::vector<render::Frame> frames;
  std::vector<FrameLogEntry> log;
  sim::Termination termination = sim::Termination::none;

  std::vector<sim::ActionCategory> categories() const;
};

struct RecordOptions {
  double fps = 30.0;
  std::optional<double> duration;  // stop the drive after this many simulated seconds
  int quality_guard_steps = 5;
  bool require_t_junction = true;
  std::string id_prefix;  // defaults to the track name
  render::RenderConfig render;
  bool keep_frames = true;  // false: frames only go to on_frame
  std::function<void(const render::Frame&)> on_frame;
};

// Greedy drive rendered at fps: frame k shows the vehicle at time k / fps,
// interpolated between simulation steps, for every k / fps before the drive
// ends.
Recording record_drive(const sim::DrivingEnv& env, const rl::Policy& policy, const RecordOptions& opts = {});

// frames/<id>.png plus log.jsonl.
void write_recording(const Recording& rec, const std::filesystem::path& dir);
// Reads log.jsonl only; frames stay on disk.
Recording read_recording_log(const std::filesystem::path& dir);
std::filesystem::path frame_path(const std::filesystem::path& dir, const std::string& frame_id);

// "frame_id category" per line ('#' comments); returns how many entries changed.
// Ids missing from the recording are an error unless allow_foreign is set.
std::size_t apply_overrides(Recording& rec, const std::filesystem::path& overrides, bool allow_foreign = false);

}  // namespace xdrive::data
