#pragma once

#include <vector>

#include <Eigen/Core>

#include "xdrive/sim/geometry.hpp"
#include "xdrive/sim/route.hpp"

namespace xdrive::sim {

// World-from-ego rigid transform: yaw rotation about z, translation
// (x, y, 0), homogeneous bottom row (0, 0, 0, 1).
Eigen::Matrix4d ego_transform(const Pose& pose);
// Ego-from-world, computed in closed form (R^T, -R^T t).
Eigen::Matrix4d ego_transform_inverse(const Pose& pose);

Vec2 to_ego(const Pose& pose, const Vec2& world);
Vec2 to_world(const Pose& pose, const Vec2& ego);

// Pose composition a * b (b expressed in a's frame).
Pose compose(const Pose& a, const Pose& b);

// Route waypoints expressed in the vehicle frame, order preserved.
std::vector<Vec2> transform_waypoints(const Pose& pose, const Route& route);

}  // namespace xdrive::sim
