#pragma once

#include <numbers>

#include <Eigen/Core>

namespace xdrive::sim {

using Vec2 = Eigen::Vector2d;

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

// Global-frame vehicle pose; z is implicitly 0.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const;
  Vec2 left() const;
  bool operator==(const Pose&) const = default;
};

Pose make_pose(double x, double y, double yaw);

struct PrimitiveProjection {
  double s = 0.0;         // arc length of the closest point, clamped to [0, length]
  double lateral = 0.0;   // signed offset, positive to the left of travel
  double distance = 0.0;  // Euclidean distance to the closest point
  double heading = 0.0;   // tangent direction at the closest point
};

// Constant-curvature centerline piece: a straight line (curvature 0) or a
// circular arc (curvature > 0 turns left).
struct Primitive {
  Vec2 start = Vec2::Zero();
  double heading = 0.0;
  double curvature = 0.0;
  double length = 0.0;

  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  Pose end_pose() const;
  PrimitiveProjection project(const Vec2& p) const;
  // Axis-aligned bounding box of the centerline.
  void bounds(Vec2& lo, Vec2& hi) const;
};

Primitive make_line(const Pose& from, double length);
Primitive make_arc(const Pose& from, double radius, double sweep, bool left);

// Oriented-rectangle vs axis-aligned-box overlap (separating axis test).
bool rect_intersects_box(const Vec2& center, double yaw, double half_length, double half_width, const Vec2& box_lo,
                         const Vec2& box_hi);

}  // namespace xdrive::sim
