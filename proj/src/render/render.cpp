#include "xdrive/render/render.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "xdrive/errors.hpp"

namespace xdrive::render {
namespace {

using sim::Vec2;

struct Culled {
  const sim::Primitive* prim;
  Vec2 lo, hi;
};

bool inside(const Vec2& p, const Vec2& lo, const Vec2& hi) {
  return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
}

std::vector<Culled> cull(const sim::Track& track, const Vec2& view_lo, const Vec2& view_hi) {
  std::vector<Culled> out;
  const double pad = track.lane_width() / 2.0;
  for (const auto& prim : track.road()) {
    Culled c{&prim, {}, {}};
    prim.bounds(c.lo, c.hi);
    c.lo.array() -= pad;
    c.hi.array() += pad;
    if (c.hi.x() < view_lo.x() || c.lo.x() > view_hi.x() || c.hi.y() < view_lo.y() || c.lo.y() > view_hi.y()) continue;
    out.push_back(c);
  }
  return out;
}

Surface classify_with(const sim::Track& track, const std::vector<Culled>& road, const Vec2& p, double marking_width) {
  for (const auto& o : track.obstacles())
    if (inside(p, o.lo, o.hi)) return Surface::obstacle;
  const double half = track.lane_width() / 2.0;
  double best = 1e300;
  for (const auto& c : road) {
    if (!inside(p, c.lo, c.hi)) continue;
    best = std::min(best, c.prim->project(p).distance);
  }
  if (best > half) return Surface::grass;
  return best > half - marking_width ? Surface::marking : Surface::road;
}

double ego_row(const RenderConfig& cfg) { return cfg.view == ViewMode::chase ? 0.75 * cfg.height : 0.5 * cfg.height; }

}  // namespace

RenderConfig RenderConfig::paper_scale() {
  RenderConfig cfg;
  cfg.width = 640;
  cfg.height = 480;
  cfg.channels = 3;
  cfg.meters_per_pixel = 0.05;
  cfg.marking_width = 0.15;
  return cfg;
}

Surface classify(const sim::Track& track, const Vec2& p, double marking_width) {
  std::vector<Culled> all;
  for (const auto& prim : track.road()) all.push_back({&prim, Vec2::Constant(-1e300), Vec2::Constant(1e300)});
  return classify_with(track, all, p, marking_width);
}

std::uint8_t level(const RenderConfig& cfg, Surface s, int channel) {
  const auto i = static_cast<std::size_t>(s);
  return cfg.channels == 1 ? cfg.palette.gray[i] : cfg.palette.rgb[i][static_cast<std::size_t>(channel)];
}

Vec2 pixel_to_world(const sim::Pose& pose, const RenderConfig& cfg, double col, double row) {
  const double forward = (ego_row(cfg) - row) * cfg.meters_per_pixel;
  const double left = (0.5 * cfg.width - col) * cfg.meters_per_pixel;
  return pose.position() + forward * pose.heading() + left * pose.left();
}

Frame render_frame(const sim::Track& track, const sim::Pose& pose, const RenderConfig& cfg) {
  if (cfg.width <= 0 || cfg.height <= 0) throw InvalidConfig("render size must be positive");
  if (cfg.channels != 1 && cfg.channels != 3) throw InvalidConfig("render channels must be 1 or 3");
  if (!(cfg.meters_per_pixel > 0.0)) throw InvalidConfig("meters_per_pixel must be positive");

  Frame frame = Frame::blank(cfg.width, cfg.height, cfg.channels);

  Vec2 lo = Vec2::Constant(1e300), hi = Vec2::Constant(-1e300);
  for (double c : {0.0, static_cast<double>(cfg.width)})
    for (double r : {0.0, static_cast<double>(cfg.height)}) {
      const Vec2 q = pixel_to_world(pose, cfg, c, r);
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  const auto road = cull(track, lo, hi);

  // footprint in ego coordinates: centred half a wheelbase ahead of the reference point
  const auto& veh = cfg.vehicle;
  const double fx = veh.wheelbase / 2.0;

  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      const Vec2 p = pixel_to_world(pose, cfg, c + 0.5, r + 0.5);
      const Vec2 rel = p - pose.position();
      const bool on_ego = cfg.draw_ego && std::abs(rel.dot(pose.heading()) - fx) <= veh.length / 2.0 &&
                          std::abs(rel.dot(pose.left())) <= veh.width / 2.0;
      const Surface s = on_ego ? Surface::ego : classify_with(track, road, p, cfg.marking_width);
      for (int ch = 0; ch < cfg.channels; ++ch) frame.pixels[frame.index(c, r, ch)] = level(cfg, s, ch);
    }
  }
  return frame;
}

}  // namespace xdrive::render
