#include "scenegan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace scenegan {

std::vector<std::uint8_t> encode_png(const Bitmap& bitmap) {
  require(bitmap.channels == 1 || bitmap.channels == 3, "png: only gray and RGB bitmaps are supported");
  require(bitmap.pixels.size() == static_cast<std::size_t>(bitmap.width * bitmap.height * bitmap.channels),
          "png: pixel buffer size mismatch");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(bitmap.width);
  image.height = static_cast<png_uint_32>(bitmap.height);
  image.format = bitmap.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, bitmap.pixels.data(), 0, nullptr))
    throw std::runtime_error(std::string("png encode failed: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, bitmap.pixels.data(), 0, nullptr))
    throw std::runtime_error(std::string("png encode failed: ") + image.message);
  out.resize(size);
  return out;
}

Bitmap decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw std::runtime_error(std::string("png decode failed: ") + image.message);
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Bitmap out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = gray ? 1 : 3;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr))
    throw std::runtime_error(std::string("png decode failed: ") + image.message);
  return out;
}

void write_png(const std::filesystem::path& path, const Bitmap& bitmap) {
  const auto bytes = encode_png(bitmap);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Bitmap read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

Bitmap to_bitmap(const Image& image) {
  require(image.channels() == 3, "to_bitmap: expected an RGB image");
  Bitmap out{image.width, image.height, 3, std::vector<std::uint8_t>(static_cast<std::size_t>(image.pixels()) * 3)};
  for (int p = 0; p < image.pixels(); ++p)
    for (int c = 0; c < 3; ++c) {
      const double v = std::round((static_cast<double>(image.values(c, p)) + 1.0) * 127.5);
      out.pixels[static_cast<std::size_t>(p * 3 + c)] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  return out;
}

Image from_bitmap(const Bitmap& bitmap) {
  Image out(3, bitmap.height, bitmap.width);
  for (int p = 0; p < bitmap.width * bitmap.height; ++p)
    for (int c = 0; c < 3; ++c) {
      const int src = bitmap.channels == 1 ? p : p * bitmap.channels + c;
      out.values(c, p) = static_cast<float>(bitmap.pixels[static_cast<std::size_t>(src)] / 127.5 - 1.0);
    }
  return out;
}

Bitmap label_bitmap(const LabelMap& labels) {
  require(labels.num_classes <= 256, "label maps with more than 256 classes cannot be stored as 8-bit images");
  Bitmap out{labels.width(), labels.height(), 1, std::vector<std::uint8_t>(static_cast<std::size_t>(labels.values.size()))};
  for (Eigen::Index i = 0; i < labels.values.size(); ++i)
    out.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(labels.values.data()[i]);
  return out;
}

LabelMap labels_from_bitmap(const Bitmap& bitmap, int num_classes) {
  require(bitmap.channels == 1, "label maps must be single-channel images");
  LabelMap out(bitmap.height, bitmap.width, num_classes);
  for (std::size_t i = 0; i < bitmap.pixels.size(); ++i) out.values.data()[i] = bitmap.pixels[i];
  out.validate();
  return out;
}

Palette default_palette(int classes) {
  Palette palette;
  for (int c = 0; c < classes; ++c) {
    // Golden-angle hue walk with alternating lightness.
    const double hue = std::fmod(c * 137.508, 360.0) / 60.0;
    const double value = c % 2 == 0 ? 0.95 : 0.7;
    const double chroma = value * 0.75;
    const double x = chroma * (1.0 - std::fabs(std::fmod(hue, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hue)) {
      case 0: r = chroma, g = x; break;
      case 1: r = x, g = chroma; break;
      case 2: g = chroma, b = x; break;
      case 3: g = x, b = chroma; break;
      case 4: r = x, b = chroma; break;
      default: r = chroma, b = x; break;
    }
    const double m = value - chroma;
    palette.push_back({static_cast<std::uint8_t>(std::lround((r + m) * 255)), static_cast<std::uint8_t>(std::lround((g + m) * 255)),
                       static_cast<std::uint8_t>(std::lround((b + m) * 255))});
  }
  return palette;
}

Palette palette_from_table(const RemapTable& table) {
  Palette palette = default_palette(table.num_super_classes());
  for (const auto& e : table.entries())
    if (e.color != std::array<std::uint8_t, 3>{0, 0, 0} || e.index == 0) palette[static_cast<std::size_t>(e.index)] = e.color;
  return palette;
}

Bitmap colorize(const LabelMap& labels, const Palette& palette) {
  Bitmap out{labels.width(), labels.height(), 3, std::vector<std::uint8_t>(static_cast<std::size_t>(labels.values.size()) * 3)};
  for (Eigen::Index i = 0; i < labels.values.size(); ++i) {
    const auto& color = palette.at(static_cast<std::size_t>(labels.values.data()[i]));
    std::copy(color.begin(), color.end(), out.pixels.begin() + i * 3);
  }
  return out;
}

Bitmap overlay(const Image& image, const LabelMap& labels, const Palette& palette, double alpha) {
  Bitmap base = to_bitmap(image);
  const Bitmap colors = colorize(labels, palette);
  for (std::size_t i = 0; i < base.pixels.size(); ++i)
    base.pixels[i] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * base.pixels[i] + alpha * colors.pixels[i]));
  return base;
}

Bitmap tile(const std::vector<Bitmap>& tiles, int columns) {
  require(!tiles.empty() && columns > 0, "tile: nothing to lay out");
  const auto& first = tiles.front();
  const int rows = (static_cast<int>(tiles.size()) + columns - 1) / columns;
  Bitmap out{first.width * columns, first.height * rows, first.channels,
             std::vector<std::uint8_t>(static_cast<std::size_t>(first.width * columns * first.height * rows * first.channels), 0)};
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const auto& b = tiles[t];
    require(b.width == first.width && b.height == first.height && b.channels == first.channels, "tile: size mismatch");
    const int ox = static_cast<int>(t) % columns * b.width;
    const int oy = static_cast<int>(t) / columns * b.height;
    for (int y = 0; y < b.height; ++y)
      std::copy_n(b.pixels.begin() + y * b.width * b.channels, b.width * b.channels,
                  out.pixels.begin() + ((oy + y) * out.width + ox) * out.channels);
  }
  return out;
}

}  // namespace scenegan
