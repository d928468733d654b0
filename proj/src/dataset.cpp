#include "scenegan/dataset.hpp"

#include "scenegan/image_io.hpp"

#include <algorithm>
#include <cstdio>

namespace scenegan {

namespace {
std::string numbered(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu.png", i);
  return name;
}
}  // namespace

void save_dataset(const std::filesystem::path& dir, const Dataset& data) {
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "labels");
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_png(dir / "images" / numbered(i), to_bitmap(data[i].image));
    write_png(dir / "labels" / numbered(i), label_bitmap(data[i].labels));
  }
}

Dataset load_dataset(const std::filesystem::path& dir, int num_classes) {
  if (!std::filesystem::is_directory(dir / "images") || !std::filesystem::is_directory(dir / "labels"))
    throw std::runtime_error("dataset " + dir.string() + " needs images/ and labels/ subdirectories");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "images"))
    if (entry.path().extension() == ".png") files.push_back(entry.path().filename());
  std::sort(files.begin(), files.end());

  Dataset data;
  int max_label = 0;
  for (const auto& name : files) {
    LabeledImage sample;
    sample.image = from_bitmap(read_png(dir / "images" / name));
    sample.labels = labels_from_bitmap(read_png(dir / "labels" / name), 256);
    require(sample.labels.height() == sample.image.height && sample.labels.width() == sample.image.width,
            "dataset: label map size differs from image " + name.string());
    max_label = std::max(max_label, static_cast<int>(sample.labels.values.maxCoeff()));
    data.push_back(std::move(sample));
  }
  const int classes = num_classes > 0 ? num_classes : max_label + 1;
  for (auto& sample : data) {
    sample.labels.num_classes = classes;
    sample.labels.validate();
  }
  return data;
}

Dataset remap_dataset(const Dataset& data, const RemapTable& table) {
  Dataset out;
  out.reserve(data.size());
  for (const auto& sample : data) out.push_back({sample.image, remap(sample.labels, table)});
  return out;
}

}  // namespace scenegan
