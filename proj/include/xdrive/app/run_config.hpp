#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "xdrive/data/corpus.hpp"
#include "xdrive/render/render.hpp"
#include "xdrive/rl/ddpg.hpp"
#include "xdrive/sim/track.hpp"
#include "xdrive/vqa/config.hpp"

namespace xdrive::app {

enum class Profile { desk, paper_scale };
std::string_view to_string(Profile p);
Profile parse_profile(std::string_view s);

// Which policy drives the recorded frames.
enum class Driver { actor, pursuit };
std::string_view to_string(Driver d);
Driver parse_driver(std::string_view s);

struct RunConfig {
  std::string track_id = "track-a";       // built-in name or track file path
  std::string test_track_id = "track-b";  // second track for the test split
  std::uint64_t seed = 1;
  Profile profile = Profile::desk;

  std::filesystem::path checkpoints = "artifacts/checkpoints";
  std::filesystem::path corpus_root = "artifacts/corpus";
  std::filesystem::path reports = "artifacts/reports";
  std::optional<std::filesystem::path> distractors;  // default: the shipped list
  std::optional<std::filesystem::path> overrides;    // manual relabelling file

  rl::Hyperparams ddpg;
  std::size_t waypoints = 15;
  Driver driver = Driver::actor;         // training track
  Driver test_driver = Driver::pursuit;  // held-out track; the actor is not trained there
  double fps = 30.0;
  int quality_guard_steps = 5;
  data::CorpusConfig corpus;
  render::RenderConfig render;
  vqa::VqaConfig vqa;
  std::size_t answer_count = 100;  // candidate answers incl. the five targets
  int top_k = 5;

  static RunConfig desk() { return {}; }
  static RunConfig paper_scale();
  void validate() const;

  std::filesystem::path agent_checkpoint() const { return checkpoints / "agent.ckpt"; }
  std::filesystem::path learning_curve() const { return reports / "learning_curve.jsonl"; }
  std::filesystem::path recording_dir(const std::string& track) const;
  std::filesystem::path manifest() const { return corpus_root / "manifest.jsonl"; }
  std::filesystem::path model() const { return checkpoints / "vqa.ckpt"; }
  std::filesystem::path vqa_log() const { return reports / "vqa_loss.jsonl"; }
  std::filesystem::path report() const { return reports / "eval_report.txt"; }
  std::filesystem::path history() const { return reports / "qa_history.jsonl"; }
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
// Missing keys keep the values of `base`.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path);

// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

sim::TrackSpec resolve_track(const std::string& id);

}  // namespace xdrive::app
