#pragma once

#include <numbers>
#include <string>
#include <string_view>

#include "xdrive/sim/geometry.hpp"
#include "xdrive/sim/route.hpp"
#include "xdrive/sim/track.hpp"

namespace xdrive::sim {

struct VehicleParams {
  double wheelbase = 2.5;
  double max_steer = 35.0 * std::numbers::pi / 180.0;
  double max_accel = 3.0;
  double max_speed = 10.0;
  double length = 4.5;  // footprint, centred half a wheelbase ahead of the rear axle
  double width = 1.8;
};

struct EnvConfig {
  VehicleParams vehicle;
  double dt = 0.05;
  double goal_radius = 2.0;
  int max_steps = 2000;
};

// Normalized controls; both axes are clamped to [-1, 1] before use.
struct Action {
  double steer = 0.0;
  double throttle = 0.0;

  Action clamped() const;
  bool operator==(const Action&) const = default;
};

enum class Event { none, lane_departure, collision, goal_reached };
// Episode-level ending: a step event or the step cap.
enum class Termination { none, lane_departure, collision, goal_reached, max_steps };

std::string_view to_string(Event e);
std::string_view to_string(Termination t);
Termination termination_of(Event e);

struct EgoState {
  Pose pose;
  double v = 0.0;
  double d = 0.0;    // signed lateral offset from the lane centre, left positive
  double phi = 0.0;  // yaw error against the lane tangent
  std::size_t route_progress = 0;  // index of the next waypoint
  double s = 0.0;                  // arc length along the route
  double time = 0.0;
  bool in_lane = true;

  bool operator==(const EgoState&) const = default;
};

struct StepOutcome {
  EgoState next_state;
  double reward = 0.0;
  bool done = false;
  Event event = Event::none;
};

inline constexpr double kDepartureReward = -200.0;
inline constexpr double kGoalReward = 100.0;

// Departure or collision: -200. Goal: +100. Otherwise the in-lane step term
// |v cos phi| - |v sin phi| - |v| |d|.
double reward(double v, double d, double phi, Event event);

// Route-following world: kinematic bicycle dynamics against one route of one
// track. step() is a pure function of its arguments.
class DrivingEnv {
 public:
  DrivingEnv(Track track, Route route, EnvConfig cfg = {});

  const Track& track() const { return track_; }
  const Route& route() const { return route_; }
  const EnvConfig& config() const { return cfg_; }

  // Vehicle on the route start, optionally displaced laterally / rotated.
  EgoState initial_state(double v0 = 0.0, double lateral = 0.0, double yaw_offset = 0.0) const;
  // Vehicle on the lane centre at route arc length s, aligned with the lane.
  EgoState state_at(double s, double v0 = 0.0) const;
  // Lane-relative quantities for a pose, searched near arc length s_hint.
  EgoState locate(const Pose& pose, double v, double s_hint, double time) const;

  StepOutcome step(const EgoState& state, Action action, double dt) const;
  StepOutcome step(const EgoState& state, Action action) const { return step(state, action, cfg_.dt); }

  bool collides(const Pose& pose) const;

 private:
  Track track_;
  Route route_;
  EnvConfig cfg_;
};

// Category of the route segment under the vehicle.
ActionCategory action_category(const Route& route, std::size_t progress, const EgoState& state);

// Stateful episode wrapper with the step cap.
class Episode {
 public:
  explicit Episode(const DrivingEnv& env) : env_(&env) {}

  const EgoState& reset(const EgoState& start);
  StepOutcome step(Action action);

  const EgoState& state() const { return state_; }
  int steps() const { return steps_; }
  Termination termination() const { return termination_; }
  bool finished() const { return termination_ != Termination::none; }

 private:
  const DrivingEnv* env_;
  EgoState state_;
  int steps_ = 0;
  Termination termination_ = Termination::none;
};

// One line-delimited trajectory record:
// {"t","x","y","yaw","v","d","phi","action":[steer,throttle],"reward","event"}.
std::string trajectory_record(const EgoState& state, const Action& action, double reward, Event event);

}  // namespace xdrive::sim
