#include "xdrive/rl/observation.hpp"

#include "xdrive/sim/transform.hpp"

namespace xdrive::rl {

ObservationConfig ObservationConfig::for_env(const sim::DrivingEnv& env, int waypoints) {
  ObservationConfig cfg;
  cfg.waypoints = waypoints;
  cfg.speed_scale = env.config().vehicle.max_speed;
  cfg.lateral_scale = env.track().lane_width() / 2.0;
  return cfg;
}

nn::VectorD observe(const sim::EgoState& state, const sim::Route& route, const ObservationConfig& cfg) {
  nn::VectorD obs(cfg.dim());
  obs(0) = state.v / cfg.speed_scale;
  obs(1) = state.d / cfg.lateral_scale;
  obs(2) = state.phi / cfg.angle_scale;
  for (int k = 0; k < cfg.waypoints; ++k) {
    const std::size_t i = state.route_progress + static_cast<std::size_t>(k);
    const sim::Vec2 world = i < route.size() ? route.waypoints[i] : route.goal;
    const sim::Vec2 ego = sim::to_ego(state.pose, world);
    obs(3 + 2 * k) = ego.x() / cfg.position_scale;
    obs(4 + 2 * k) = ego.y() / cfg.position_scale;
  }
  return obs;
}

}  // namespace xdrive::rl
