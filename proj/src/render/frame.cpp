#include "xdrive/render/frame.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>

#include <png.h>

#include "xdrive/errors.hpp"

namespace xdrive::render {
namespace {

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->size - cur->pos < n) png_error(png, "unexpected end of data");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void write_to_memory(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void flush_noop(png_structp) {}

void quiet_warning(png_structp, png_const_charp) {}

// Default handler prints to stderr before jumping; callers already report the failure.
[[noreturn]] void quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }

int color_type_for(int channels) { return channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY; }

}  // namespace

Frame Frame::blank(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw InvalidConfig("frame needs positive size and 1 or 3 channels");
  Frame f;
  f.width = width;
  f.height = height;
  f.channels = channels;
  f.pixels.assign(static_cast<std::size_t>(width) * height * channels, 0);
  return f;
}

bool Frame::valid() const {
  return width > 0 && height > 0 && (channels == 1 || channels == 3) &&
         pixels.size() == static_cast<std::size_t>(width) * height * channels;
}

std::uint64_t pixel_hash(const Frame& frame) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int v : {frame.width, frame.height, frame.channels})
    for (int i = 0; i < 4; ++i) feed(static_cast<std::uint8_t>((static_cast<unsigned>(v) >> (8 * i)) & 0xff));
  for (auto p : frame.pixels) feed(p);
  return h;
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  if (!frame.valid()) throw InvalidConfig("cannot encode an invalid frame");
  std::vector<std::uint8_t> out;
  char time_buf[64];
  std::snprintf(time_buf, sizeof time_buf, "%.17g", frame.meta.sim_time);
  const std::string category = frame.meta.category ? std::string(sim::to_string(*frame.meta.category)) : "";
  std::vector<png_bytep> rows(static_cast<std::size_t>(frame.height));
  for (int y = 0; y < frame.height; ++y)
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(frame.pixels.data() + frame.index(0, y));

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error, quiet_warning);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encoding failed");
  }
  png_set_write_fn(png, &out, write_to_memory, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width), static_cast<png_uint_32>(frame.height), 8,
               color_type_for(frame.channels), PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_text text[3] = {};
  text[0].compression = text[1].compression = text[2].compression = PNG_TEXT_COMPRESSION_NONE;
  text[0].key = const_cast<char*>("frame_id");
  text[0].text = const_cast<char*>(frame.meta.frame_id.c_str());
  text[1].key = const_cast<char*>("sim_time");
  text[1].text = time_buf;
  text[2].key = const_cast<char*>("category");
  text[2].text = const_cast<char*>(category.c_str());
  png_set_text(png, info, text, 3);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Frame decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw FormatError("not a PNG file");
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  Frame frame;
  std::vector<png_bytep> rows;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error, quiet_warning);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt or truncated PNG");
  }
  png_set_read_fn(png, &cursor, read_from_memory);
  png_read_info(png, info);
  const auto bit_depth = png_get_bit_depth(png, info);
  const auto color = png_get_color_type(png, info);
  if (bit_depth != 8 || (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB) ||
      png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG layout (need 8-bit gray or RGB)");
  }
  frame.width = static_cast<int>(png_get_image_width(png, info));
  frame.height = static_cast<int>(png_get_image_height(png, info));
  frame.channels = color == PNG_COLOR_TYPE_RGB ? 3 : 1;
  frame.pixels.assign(static_cast<std::size_t>(frame.width) * frame.height * frame.channels, 0);
  rows.resize(static_cast<std::size_t>(frame.height));
  for (int y = 0; y < frame.height; ++y) rows[static_cast<std::size_t>(y)] = frame.pixels.data() + frame.index(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  png_textp text = nullptr;
  int n_text = 0;
  png_get_text(png, info, &text, &n_text);
  std::string frame_id, sim_time, category;
  for (int i = 0; i < n_text; ++i) {
    const std::string key = text[i].key;
    if (key == "frame_id") frame_id = text[i].text;
    if (key == "sim_time") sim_time = text[i].text;
    if (key == "category") category = text[i].text;
  }
  png_destroy_read_struct(&png, &info, nullptr);

  frame.meta.frame_id = frame_id;
  frame.meta.sim_time = sim_time.empty() ? 0.0 : std::strtod(sim_time.c_str(), nullptr);
  if (!category.empty()) {
    frame.meta.category = sim::parse_category(category);
    if (!frame.meta.category) throw FormatError("unknown category '" + category + "' in PNG metadata");
  }
  return frame;
}

void write_frame(const Frame& frame, const std::filesystem::path& path) {
  const auto bytes = encode_png(frame);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Frame read_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace xdrive::render
