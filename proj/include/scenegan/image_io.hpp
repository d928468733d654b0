#pragma once

#include "scenegan/class_grouping.hpp"
#include "scenegan/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace scenegan {

/// 8-bit interleaved pixels, row-major.
struct Bitmap {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;
};

std::vector<std::uint8_t> encode_png(const Bitmap& bitmap);
Bitmap decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const std::filesystem::path& path, const Bitmap& bitmap);
Bitmap read_png(const std::filesystem::path& path);

/// [-1, 1] float image <-> 8-bit RGB (round to nearest, clamped).
Bitmap to_bitmap(const Image& image);
Image from_bitmap(const Bitmap& bitmap);

Bitmap label_bitmap(const LabelMap& labels);
LabelMap labels_from_bitmap(const Bitmap& bitmap, int num_classes);

using Palette = std::vector<std::array<std::uint8_t, 3>>;
/// Deterministic class colors; index c always maps to the same color.
Palette default_palette(int classes);
Palette palette_from_table(const RemapTable& table);
Bitmap colorize(const LabelMap& labels, const Palette& palette);
/// Alpha-blends the colorized labels over the image.
Bitmap overlay(const Image& image, const LabelMap& labels, const Palette& palette, double alpha = 0.5);

/// Lays images out on a grid (row-major), all images must share a size.
Bitmap tile(const std::vector<Bitmap>& tiles, int columns);

}  // namespace scenegan
