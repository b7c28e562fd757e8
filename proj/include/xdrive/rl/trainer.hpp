#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xdrive/rl/ddpg.hpp"
#include "xdrive/rl/observation.hpp"
#include "xdrive/sim/env.hpp"

namespace xdrive::rl {

struct EpisodeLog {
  int episode = 0;
  double ret = 0.0;  // undiscounted, unscaled return
  int steps = 0;
  sim::Termination event = sim::Termination::none;
  bool operator==(const EpisodeLog&) const = default;
};

// {"episode","return","steps","event"}
std::string to_json_line(const EpisodeLog& log);
EpisodeLog parse_episode_log(const std::string& line);

struct TrainOptions {
  std::uint64_t seed = 0;
  int observation_waypoints = 15;
  std::optional<std::filesystem::path> checkpoint;  // written at the end of training
  std::optional<std::filesystem::path> curve;       // learning-curve JSONL
  std::function<void(const EpisodeLog&)> on_episode;
};

struct TrainResult {
  DdpgAgent agent;
  std::vector<EpisodeLog> curve;
};

TrainResult train(const sim::DrivingEnv& env, const Hyperparams& hp, const TrainOptions& opts = {});

using Policy = std::function<sim::Action(const sim::EgoState&)>;

// Greedy actor policy for a given route.
Policy actor_policy(const DdpgAgent& agent, const sim::Route& route, const ObservationConfig& cfg);

struct Rollout {
  std::vector<sim::EgoState> states;  // states[0] is the start
  std::vector<sim::Action> actions;
  std::vector<double> rewards;
  std::vector<sim::Event> events;
  sim::Termination termination = sim::Termination::none;
  double ret = 0.0;
};

Rollout rollout(const sim::DrivingEnv& env, const Policy& policy, const sim::EgoState& start);
inline Rollout rollout(const sim::DrivingEnv& env, const Policy& policy) {
  return rollout(env, policy, env.initial_state());
}

// Pure-pursuit steering with a speed hold; a scripted reference driver.
Policy pure_pursuit_policy(const sim::DrivingEnv& env, double target_speed = 6.0, double lookahead = 6.0);

}  // namespace xdrive::rl
