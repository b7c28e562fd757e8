#include "xdrive/rl/trainer.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "xdrive/errors.hpp"
#include "xdrive/sim/transform.hpp"

namespace xdrive::rl {

std::string to_json_line(const EpisodeLog& log) {
  nlohmann::ordered_json j;
  j["episode"] = log.episode;
  j["return"] = log.ret;
  j["steps"] = log.steps;
  j["event"] = sim::to_string(log.event);
  return j.dump();
}

EpisodeLog parse_episode_log(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    EpisodeLog log;
    log.episode = j.at("episode").get<int>();
    log.ret = j.at("return").get<double>();
    log.steps = j.at("steps").get<int>();
    const auto ev = j.at("event").get<std::string>();
    for (auto t : {sim::Termination::none, sim::Termination::lane_departure, sim::Termination::collision,
                   sim::Termination::goal_reached, sim::Termination::max_steps})
      if (sim::to_string(t) == ev) log.event = t;
    return log;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad learning-curve record: ") + e.what());
  }
}

TrainResult train(const sim::DrivingEnv& env, const Hyperparams& hp, const TrainOptions& opts) {
  hp.validate();
  const auto ocfg = ObservationConfig::for_env(env, opts.observation_waypoints);
  TrainResult result{DdpgAgent(ocfg.dim(), 2, hp, opts.seed), {}};
  DdpgAgent& agent = result.agent;
  ReplayBuffer buffer(hp.buffer_capacity, ocfg.dim(), 2, opts.seed ^ 0xb0ffe7ULL);
  ActionNoise noise(hp.noise, 2, nn::Rng(opts.seed, 0x4015e));

  nn::Rng warmup_rng(opts.seed, 0x3a3a);
  nn::Rng start_rng(opts.seed, 0x57a7);
  std::ofstream curve;
  if (opts.curve) {
    curve.open(*opts.curve, std::ios::trunc);
    if (!curve) throw IoError("cannot open '" + opts.curve->string() + "'");
  }

  long total_steps = 0;
  for (int ep = 0; ep < hp.episodes; ++ep) {
    noise.set_sigma(sigma_at(hp.noise, ep, hp.episodes));
    noise.reset();
    sim::Episode episode(env);
    if (hp.random_start > 0.0 && start_rng.uniform(0.0, 1.0) < hp.random_start) {
      const double s = start_rng.uniform(0.0, 0.9 * env.route().length);
      episode.reset(env.state_at(s, start_rng.uniform(0.0, hp.random_start_speed)));
    } else {
      episode.reset(env.initial_state());
    }
    nn::VectorD obs = observe(episode.state(), env.route(), ocfg);
    EpisodeLog log{ep, 0.0, 0, sim::Termination::none};
    while (!episode.finished()) {
      nn::VectorD a;
      if (hp.random_warmup && total_steps < hp.warmup_steps) {
        a.resize(2);
        for (nn::Index i = 0; i < 2; ++i) a(i) = warmup_rng.uniform(-1.0, 1.0);
      } else {
        a = agent.select_action(obs, noise, true);
      }
      const auto out = episode.step(to_action(a));
      const nn::VectorD next = observe(out.next_state, env.route(), ocfg);
      // Step-cap truncation is not terminal: only real events cut the bootstrap.
      buffer.push({obs.cast<float>(), a.cast<float>(), static_cast<float>(out.reward * hp.reward_scale),
                   next.cast<float>(), out.done});
      obs = next;
      log.ret += out.reward;
      ++total_steps;
      if (total_steps >= hp.warmup_steps && buffer.size() >= hp.batch_size) agent.train_step(buffer);
    }
    log.steps = episode.steps();
    log.event = episode.termination();
    result.curve.push_back(log);
    if (curve) curve << to_json_line(log) << "\n" << std::flush;
    if (opts.on_episode) opts.on_episode(log);
  }
  if (opts.checkpoint) agent.save(*opts.checkpoint);
  return result;
}

Policy actor_policy(const DdpgAgent& agent, const sim::Route& route, const ObservationConfig& cfg) {
  return [&agent, &route, cfg](const sim::EgoState& s) { return to_action(agent.policy(observe(s, route, cfg))); };
}

Rollout rollout(const sim::DrivingEnv& env, const Policy& policy, const sim::EgoState& start) {
  Rollout r;
  sim::Episode episode(env);
  episode.reset(start);
  r.states.push_back(start);
  while (!episode.finished()) {
    const sim::Action a = policy(episode.state()).clamped();
    const auto out = episode.step(a);
    r.actions.push_back(a);
    r.rewards.push_back(out.reward);
    r.events.push_back(out.event);
    r.states.push_back(out.next_state);
    r.ret += out.reward;
  }
  r.termination = episode.termination();
  return r;
}

Policy pure_pursuit_policy(const sim::DrivingEnv& env, double target_speed, double lookahead) {
  return [&env, target_speed, lookahead](const sim::EgoState& s) {
    const auto& route = env.route();
    const double s_look = std::min(s.s + lookahead, route.length);
    const sim::Vec2 target = sim::to_ego(s.pose, route.point_at(s_look));
    const double ld2 = std::max(target.squaredNorm(), 1e-6);
    const double curvature = 2.0 * target.y() / ld2;
    const auto& veh = env.config().vehicle;
    const double delta = std::atan(curvature * veh.wheelbase);
    const double throttle = std::clamp((target_speed - s.v) / (veh.max_accel * env.config().dt), -1.0, 1.0);
    return sim::Action{std::clamp(delta / veh.max_steer, -1.0, 1.0), throttle};
  };
}

}  // namespace xdrive::rl
