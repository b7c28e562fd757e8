#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xdrive/app/history.hpp"
#include "xdrive/render/render.hpp"
#include "xdrive/rl/trainer.hpp"
#include "xdrive/vqa/train.hpp"

namespace xdrive::app {

struct FrameInfo {
  std::string id;
  double sim_time = 0.0;
  std::optional<sim::ActionCategory> category;
};

// Frames the service can hand out: recordings on disk plus frames rendered
// live. Lookups are thread-safe.
class FrameStore {
 public:
  // Indexes <dir>/log.jsonl; returns the recording's frames in order.
  std::vector<FrameInfo> add_recording(const std::filesystem::path& dir);
  void add_live(render::Frame frame);
  bool contains(const std::string& id) const;
  // Throws std::out_of_range for an unknown id.
  render::Frame frame(const std::string& id) const;
  std::vector<std::uint8_t> png(const std::string& id) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::filesystem::path> disk_;
  std::map<std::string, render::Frame> live_;
};

// Steps a frozen policy on demand and renders each new frame.
struct LiveDrive {
  std::shared_ptr<const sim::DrivingEnv> env;
  rl::Policy policy;
  render::RenderConfig render;
  double fps = 30.0;
};

// Playback cursor over a replayed recording or a live drive. All commands
// go through one mutex, so control is serialized.
class Session {
 public:
  Session(std::vector<FrameInfo> replay, double fps);
  Session(LiveDrive live, FrameStore& store);

  nlohmann::ordered_json state();
  // play | pause | step [n] | seek <index or frame id>; throws InvalidArgument.
  nlohmann::ordered_json control(const std::string& command, const nlohmann::json& arg);
  bool live() const { return live_.has_value(); }

 private:
  void advance_to(std::size_t index);
  void sync_playback();
  bool extend();  // live mode: render one more frame, false once the drive ended

  std::mutex mu_;
  std::vector<FrameInfo> frames_;
  std::size_t index_ = 0;
  double fps_;
  bool playing_ = false;
  std::chrono::steady_clock::time_point anchor_time_;
  std::size_t anchor_index_ = 0;

  struct LiveState {
    LiveDrive drive;
    FrameStore* store;
    sim::Episode episode;
    sim::EgoState prev;
    double next_time = 0.0;
  };
  std::optional<LiveState> live_;
};

struct ServiceOptions {
  std::optional<std::filesystem::path> replay;  // recording dir played back by the session
  std::vector<std::filesystem::path> recordings;  // extra dirs whose frames are addressable
  std::optional<LiveDrive> live;  // replaces replay when set
  std::optional<std::filesystem::path> history;
  std::size_t top_k = 5;
  double fps = 30.0;
};

class Service {
 public:
  explicit Service(ServiceOptions opts);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Until a model is loaded /api/ask answers 503.
  void load_model(const std::filesystem::path& path);
  void set_model(std::shared_ptr<const vqa::VqaBundle> model);
  bool ready() const;

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host, int port);
  void wait();
  void stop();

  // The /api/ask core, shared with tests: throws std::out_of_range for an
  // unknown frame and EmptyQuestion for an empty question.
  nlohmann::ordered_json ask(const std::string& frame_id, const std::string& question);

  FrameStore& frames() { return frames_; }
  Session& session() { return *session_; }
  HistoryLog& history() { return *history_; }

 private:
  struct Impl;
  ServiceOptions opts_;
  FrameStore frames_;
  std::unique_ptr<Session> session_;
  std::unique_ptr<HistoryLog> history_;
  mutable std::mutex model_mu_;
  std::shared_ptr<const vqa::VqaBundle> model_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xdrive::app
