#pragma once

#include "scenegan/class_grouping.hpp"
#include "scenegan/tensor.hpp"

#include <filesystem>
#include <vector>

namespace scenegan {

/// An RGB image in [-1, 1] with its pixel-aligned label map.
struct LabeledImage {
  Image image;
  LabelMap labels;
};

using Dataset = std::vector<LabeledImage>;

/// Directory layout: <dir>/images/NNNNNN.png (RGB) and <dir>/labels/NNNNNN.png (8-bit indexed).
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
/// Loads every image/label pair; label maps get `num_classes` (0 = 1 + max value seen).
Dataset load_dataset(const std::filesystem::path& dir, int num_classes = 0);

Dataset remap_dataset(const Dataset& data, const RemapTable& table);

}  // namespace scenegan
