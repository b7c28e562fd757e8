#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xdrive/sim/track.hpp"

namespace xdrive::render {

struct FrameMeta {
  std::string frame_id;
  double sim_time = 0.0;
  std::optional<sim::ActionCategory> category;
  bool operator==(const FrameMeta&) const = default;
};

// 8-bit raster, row-major with interleaved channels. Intensities are
// pixel / 255, so every stored value lies in [0, 1] and PNG round-trips
// are exact.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
  FrameMeta meta;

  static Frame blank(int width, int height, int channels);

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
  double intensity(int x, int y, int c = 0) const { return at(x, y, c) / 255.0; }
  bool valid() const;
  bool operator==(const Frame&) const = default;
};

// FNV-1a over (width, height, channels, pixels); metadata excluded.
std::uint64_t pixel_hash(const Frame& frame);

// PNG with the metadata in tEXt chunks (frame_id, sim_time, category).
std::vector<std::uint8_t> encode_png(const Frame& frame);
Frame decode_png(const std::vector<std::uint8_t>& bytes);

void write_frame(const Frame& frame, const std::filesystem::path& path);
Frame read_frame(const std::filesystem::path& path);

}  // namespace xdrive::render
