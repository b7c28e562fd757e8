#pragma once

#include <array>
#include <cstdint>

#include "xdrive/render/frame.hpp"
#include "xdrive/sim/env.hpp"
#include "xdrive/sim/track.hpp"

namespace xdrive::render {

enum class ViewMode {
  chase,        // ego at 3/4 height, heading up
  ego_aligned,  // ego at the image centre, heading up
};

enum class Surface { grass, road, marking, obstacle, ego };

struct Palette {
  std::array<std::uint8_t, 5> gray = {40, 128, 230, 10, 255};
  std::array<std::array<std::uint8_t, 3>, 5> rgb = {{{60, 120, 50}, {110, 110, 115}, {240, 240, 240}, {170, 60, 40},
                                                     {40, 160, 230}}};
};

struct RenderConfig {
  int width = 64;
  int height = 64;
  int channels = 1;
  double meters_per_pixel = 0.5;
  double marking_width = 0.5;  // painted band just inside each road edge
  ViewMode view = ViewMode::chase;
  bool draw_ego = true;
  sim::VehicleParams vehicle;
  Palette palette;

  static RenderConfig desk() { return {}; }
  static RenderConfig paper_scale();
};

// Surface class of a world point, ignoring the ego footprint.
Surface classify(const sim::Track& track, const sim::Vec2& p, double marking_width);

std::uint8_t level(const RenderConfig& cfg, Surface s, int channel);

// Top-down raster around the ego pose. Pure function of its arguments.
Frame render_frame(const sim::Track& track, const sim::Pose& pose, const RenderConfig& cfg = {});
inline Frame render_frame(const sim::Track& track, const sim::EgoState& state, const RenderConfig& cfg = {}) {
  return render_frame(track, state.pose, cfg);
}

// World position of a pixel centre.
sim::Vec2 pixel_to_world(const sim::Pose& pose, const RenderConfig& cfg, double col, double row);

}  // namespace xdrive::render
