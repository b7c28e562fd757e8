#pragma once

#include "xdrive/nn/tensor.hpp"
#include "xdrive/sim/env.hpp"
#include "xdrive/sim/route.hpp"

namespace xdrive::rl {

// Fixed scales that bring each observation component to roughly [-1, 1].
struct ObservationConfig {
  int waypoints = 15;
  double speed_scale = 10.0;    // v_max
  double lateral_scale = 2.0;   // lane_width / 2
  double angle_scale = std::numbers::pi;
  double position_scale = 50.0;

  static ObservationConfig for_env(const sim::DrivingEnv& env, int waypoints = 15);
  int dim() const { return 3 + 2 * waypoints; }
};

// [v, d, phi, (x, y) of the next K waypoints in the ego frame], each scaled.
// Slots past the end of the route repeat the goal.
nn::VectorD observe(const sim::EgoState& state, const sim::Route& route, const ObservationConfig& cfg);

}  // namespace xdrive::rl
