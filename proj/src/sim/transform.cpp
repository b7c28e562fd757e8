#include "xdrive/sim/transform.hpp"

#include <cmath>

namespace xdrive::sim {

Eigen::Matrix4d ego_transform(const Pose& pose) {
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  Eigen::Matrix4d m;
  m << c, -s, 0, pose.x,
       s, c, 0, pose.y,
       0, 0, 1, 0,
       0, 0, 0, 1;
  return m;
}

Eigen::Matrix4d ego_transform_inverse(const Pose& pose) {
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  Eigen::Matrix4d m;
  m << c, s, 0, -(c * pose.x + s * pose.y),
       -s, c, 0, s * pose.x - c * pose.y,
       0, 0, 1, 0,
       0, 0, 0, 1;
  return m;
}

Vec2 to_ego(const Pose& pose, const Vec2& world) {
  const Eigen::Vector4d p = ego_transform_inverse(pose) * Eigen::Vector4d(world.x(), world.y(), 0.0, 1.0);
  return p.head<2>();
}

Vec2 to_world(const Pose& pose, const Vec2& ego) {
  const Eigen::Vector4d p = ego_transform(pose) * Eigen::Vector4d(ego.x(), ego.y(), 0.0, 1.0);
  return p.head<2>();
}

Pose compose(const Pose& a, const Pose& b) {
  const Vec2 p = to_world(a, b.position());
  return make_pose(p.x(), p.y(), a.yaw + b.yaw);
}

std::vector<Vec2> transform_waypoints(const Pose& pose, const Route& route) {
  const Eigen::Matrix4d inv = ego_transform_inverse(pose);
  std::vector<Vec2> out;
  out.reserve(route.waypoints.size());
  for (const auto& w : route.waypoints) {
    const Eigen::Vector4d p = inv * Eigen::Vector4d(w.x(), w.y(), 0.0, 1.0);
    out.push_back(p.head<2>());
  }
  return out;
}

}  // namespace xdrive::sim
