#include "xdrive/sim/env.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "xdrive/errors.hpp"

namespace xdrive::sim {

Action Action::clamped() const { return {std::clamp(steer, -1.0, 1.0), std::clamp(throttle, -1.0, 1.0)}; }

std::string_view to_string(Event e) {
  switch (e) {
    case Event::none: return "none";
    case Event::lane_departure: return "lane_departure";
    case Event::collision: return "collision";
    case Event::goal_reached: return "goal_reached";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::none: return "none";
    case Termination::lane_departure: return "lane_departure";
    case Termination::collision: return "collision";
    case Termination::goal_reached: return "goal_reached";
    case Termination::max_steps: return "max_steps";
  }
  return "?";
}

Termination termination_of(Event e) {
  switch (e) {
    case Event::none: return Termination::none;
    case Event::lane_departure: return Termination::lane_departure;
    case Event::collision: return Termination::collision;
    case Event::goal_reached: return Termination::goal_reached;
  }
  return Termination::none;
}

double reward(double v, double d, double phi, Event event) {
  switch (event) {
    case Event::lane_departure:
    case Event::collision: return kDepartureReward;
    case Event::goal_reached: return kGoalReward;
    case Event::none: break;
  }
  return std::abs(v * std::cos(phi)) - std::abs(v * std::sin(phi)) - std::abs(v) * std::abs(d);
}

DrivingEnv::DrivingEnv(Track track, Route route, EnvConfig cfg)
    : track_(std::move(track)), route_(std::move(route)), cfg_(cfg) {
  if (route_.pieces.empty()) throw InvalidArgument("environment needs a non-empty route");
}

EgoState DrivingEnv::locate(const Pose& pose, double v, double s_hint, double time) const {
  const auto lane = route_.project(pose.position(), s_hint);
  EgoState st;
  st.pose = pose;
  st.v = v;
  st.d = lane.lateral;
  st.phi = normalize_angle(pose.yaw - lane.heading);
  st.s = lane.s;
  st.route_progress = route_.next_waypoint(lane.s);
  st.time = time;
  st.in_lane = std::abs(st.d) <= track_.lane_width() / 2.0;
  return st;
}

EgoState DrivingEnv::initial_state(double v0, double lateral, double yaw_offset) const {
  const auto& first = route_.pieces.front().geometry;
  const Vec2 n(-std::sin(first.heading), std::cos(first.heading));
  const Vec2 p = first.start + lateral * n;
  return locate(make_pose(p.x(), p.y(), first.heading + yaw_offset), std::clamp(v0, 0.0, cfg_.vehicle.max_speed), 0.0,
                0.0);
}

EgoState DrivingEnv::state_at(double s, double v0) const {
  s = std::clamp(s, 0.0, route_.length);
  const Vec2 p = route_.point_at(s);
  return locate(make_pose(p.x(), p.y(), route_.heading_at(s)), std::clamp(v0, 0.0, cfg_.vehicle.max_speed), s, 0.0);
}

bool DrivingEnv::collides(const Pose& pose) const {
  const auto& veh = cfg_.vehicle;
  const Vec2 center = pose.position() + (veh.wheelbase / 2.0) * pose.heading();
  for (const auto& o : track_.obstacles())
    if (rect_intersects_box(center, pose.yaw, veh.length / 2.0, veh.width / 2.0, o.lo, o.hi)) return true;
  return false;
}

StepOutcome DrivingEnv::step(const EgoState& state, Action action, double dt) const {
  if (!(dt > 0.0 && dt <= 0.1)) throw InvalidDt("dt must be in (0, 0.1], got " + std::to_string(dt));
  const auto& veh = cfg_.vehicle;
  const Action a = action.clamped();
  const double delta = a.steer * veh.max_steer;
  const double accel = a.throttle * veh.max_accel;

  const double v = state.v;
  const double yaw = state.pose.yaw;
  const Pose pose{state.pose.x + v * std::cos(yaw) * dt, state.pose.y + v * std::sin(yaw) * dt,
                  normalize_angle(yaw + v / veh.wheelbase * std::tan(delta) * dt)};
  const double v_next = std::clamp(v + accel * dt, 0.0, veh.max_speed);

  StepOutcome out;
  out.next_state = locate(pose, v_next, state.s, state.time + dt);
  const auto& ns = out.next_state;
  if (collides(pose)) {
    out.event = Event::collision;
  } else if (!ns.in_lane) {
    out.event = Event::lane_departure;
  } else if ((pose.position() - route_.goal).norm() <= cfg_.goal_radius) {
    out.event = Event::goal_reached;
  }
  out.done = out.event != Event::none;
  out.reward = reward(ns.v, ns.d, ns.phi, out.event);
  return out;
}

ActionCategory action_category(const Route& route, std::size_t progress, const EgoState& state) {
  if (progress >= route.size()) throw InvalidArgument("route progress outside the route");
  return category_of(route.tag_at(state.s));
}

const EgoState& Episode::reset(const EgoState& start) {
  state_ = start;
  steps_ = 0;
  termination_ = Termination::none;
  return state_;
}

StepOutcome Episode::step(Action action) {
  if (finished()) throw InvalidArgument("episode already finished");
  StepOutcome out = env_->step(state_, action);
  state_ = out.next_state;
  ++steps_;
  termination_ = termination_of(out.event);
  if (!out.done && steps_ >= env_->config().max_steps) termination_ = Termination::max_steps;
  return out;
}

std::string trajectory_record(const EgoState& state, const Action& action, double reward, Event event) {
  nlohmann::ordered_json j;
  j["t"] = state.time;
  j["x"] = state.pose.x;
  j["y"] = state.pose.y;
  j["yaw"] = state.pose.yaw;
  j["v"] = state.v;
  j["d"] = state.d;
  j["phi"] = state.phi;
  j["action"] = {action.steer, action.throttle};
  j["reward"] = reward;
  j["event"] = to_string(event);
  return j.dump();
}

}  // namespace xdrive::sim
