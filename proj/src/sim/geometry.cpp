#include "xdrive/sim/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace xdrive::sim {

using std::numbers::pi;

double normalize_angle(double a) {
  if (a > -pi && a <= pi) return a;
  a = std::fmod(a + pi, 2.0 * pi);
  if (a <= 0.0) a += 2.0 * pi;
  return a - pi;
}

Vec2 Pose::heading() const { return {std::cos(yaw), std::sin(yaw)}; }
Vec2 Pose::left() const { return {-std::sin(yaw), std::cos(yaw)}; }

Pose make_pose(double x, double y, double yaw) { return {x, y, normalize_angle(yaw)}; }

Vec2 Primitive::point_at(double s) const {
  if (curvature == 0.0) return start + s * Vec2(std::cos(heading), std::sin(heading));
  const double th = heading + curvature * s;
  return start + Vec2((std::sin(th) - std::sin(heading)) / curvature, -(std::cos(th) - std::cos(heading)) / curvature);
}

double Primitive::heading_at(double s) const { return normalize_angle(heading + curvature * s); }

Pose Primitive::end_pose() const {
  const Vec2 p = point_at(length);
  return {p.x(), p.y(), heading_at(length)};
}

PrimitiveProjection Primitive::project(const Vec2& p) const {
  PrimitiveProjection out;
  if (curvature == 0.0) {
    const Vec2 t(std::cos(heading), std::sin(heading));
    const Vec2 n(-t.y(), t.x());
    const Vec2 w = p - start;
    out.s = std::clamp(w.dot(t), 0.0, length);
    out.lateral = w.dot(n);
    out.distance = (p - (start + out.s * t)).norm();
    out.heading = normalize_angle(heading);
    return out;
  }
  const Vec2 n0(-std::sin(heading), std::cos(heading));
  const Vec2 center = start + n0 / curvature;
  const Vec2 w = p - center;
  double s = 0.0;
  if (w.squaredNorm() > 0.0) {
    const double polar = std::atan2(w.y(), w.x());
    const double tangent = curvature > 0.0 ? polar + pi / 2.0 : polar - pi / 2.0;
    const double mid = curvature * length / 2.0;
    const double delta = mid + normalize_angle(tangent - heading - mid);
    s = std::clamp(delta / curvature, 0.0, length);
  }
  const Vec2 q = point_at(s);
  const double th = heading + curvature * s;
  out.s = s;
  out.lateral = (p - q).dot(Vec2(-std::sin(th), std::cos(th)));
  out.distance = (p - q).norm();
  out.heading = normalize_angle(th);
  return out;
}

void Primitive::bounds(Vec2& lo, Vec2& hi) const {
  lo = hi = start;
  constexpr int kSamples = 32;
  for (int i = 1; i <= kSamples; ++i) {
    const Vec2 q = point_at(length * i / kSamples);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  if (curvature != 0.0) {
    // chord sagitta between samples
    const double step = length / kSamples;
    const double pad = std::abs(curvature) * step * step / 8.0;
    lo.array() -= pad;
    hi.array() += pad;
  }
}

Primitive make_line(const Pose& from, double length) {
  return {from.position(), from.yaw, 0.0, length};
}

Primitive make_arc(const Pose& from, double radius, double sweep, bool left) {
  return {from.position(), from.yaw, (left ? 1.0 : -1.0) / radius, radius * sweep};
}

bool rect_intersects_box(const Vec2& center, double yaw, double half_length, double half_width, const Vec2& box_lo,
                         const Vec2& box_hi) {
  const Vec2 ax(std::cos(yaw), std::sin(yaw));
  const Vec2 ay(-ax.y(), ax.x());
  const std::array<Vec2, 4> rect = {center + half_length * ax + half_width * ay, center + half_length * ax - half_width * ay,
                                    center - half_length * ax - half_width * ay, center - half_length * ax + half_width * ay};
  const std::array<Vec2, 4> box = {box_lo, Vec2(box_hi.x(), box_lo.y()), box_hi, Vec2(box_lo.x(), box_hi.y())};
  const std::array<Vec2, 4> axes = {Vec2(1, 0), Vec2(0, 1), ax, ay};
  for (const auto& axis : axes) {
    double rmin = 1e300, rmax = -1e300, bmin = 1e300, bmax = -1e300;
    for (const auto& c : rect) {
      rmin = std::min(rmin, c.dot(axis));
      rmax = std::max(rmax, c.dot(axis));
    }
    for (const auto& c : box) {
      bmin = std::min(bmin, c.dot(axis));
      bmax = std::max(bmax, c.dot(axis));
    }
    if (rmax < bmin || bmax < rmin) return false;
  }
  return true;
}

}  // namespace xdrive::sim
