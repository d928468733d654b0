#pragma once

#include "scenegan/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scenegan {

/// H x W grid of class indices in [0, num_classes).
struct LabelMap {
  using Grid = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Grid values;
  int num_classes = 0;

  LabelMap() = default;
  LabelMap(int height, int width, int classes, std::int32_t fill = 0)
      : values(Grid::Constant(height, width, fill)), num_classes(classes) {}
  LabelMap(Grid grid, int classes) : values(std::move(grid)), num_classes(classes) { validate(); }

  int height() const { return static_cast<int>(values.rows()); }
  int width() const { return static_cast<int>(values.cols()); }
  std::int32_t operator()(int y, int x) const { return values(y, x); }
  std::int32_t& operator()(int y, int x) { return values(y, x); }

  /// Throws std::invalid_argument if the grid is empty or any value is outside [0, num_classes).
  void validate() const;
};

class PartitionError : public std::runtime_error {
 public:
  explicit PartitionError(int index, const std::string& what) : std::runtime_error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnmappedClassError : public std::runtime_error {
 public:
  explicit UnmappedClassError(int value)
      : std::runtime_error("label value " + std::to_string(value) + " is not covered by the remap table"), value_(value) {}
  int value() const { return value_; }

 private:
  int value_;
};

struct SuperClass {
  std::string name;
  int index = 0;
  std::vector<int> sources;
  std::array<std::uint8_t, 3> color{0, 0, 0};
};

/// Partition of source class indices into super-classes 0..C-1.
class RemapTable {
 public:
  /// Validates the partition and index invariants. `declared_sources` (when > 0)
  /// is the number of source classes the table must cover exactly.
  static RemapTable from_entries(std::vector<SuperClass> entries, int declared_sources = 0);
  static RemapTable identity(int classes);

  int num_super_classes() const { return static_cast<int>(entries_.size()); }
  int num_source_classes() const { return static_cast<int>(lookup_.size()); }
  const std::vector<SuperClass>& entries() const { return entries_; }
  const SuperClass& super_class(int index) const { return entries_.at(static_cast<std::size_t>(index)); }

  /// Super-class of a source index, or -1 if not covered.
  int lookup(int source) const {
    return source >= 0 && source < num_source_classes() ? lookup_[static_cast<std::size_t>(source)] : -1;
  }

  std::string name;

 private:
  std::vector<SuperClass> entries_;  // sorted by index
  std::vector<int> lookup_;
};

RemapTable parse_remap_table(std::string_view document);
RemapTable load_remap_table(const std::filesystem::path& path);
std::string serialize_remap_table(const RemapTable& table);

/// Rewrites every pixel to its super-class. Throws UnmappedClassError on the first uncovered value.
LabelMap remap(const LabelMap& map, const RemapTable& table);
/// Every distinct pixel value of `map` not covered by `table`.
std::set<int> unmapped_values(const LabelMap& map, const RemapTable& table);

std::vector<std::int64_t> class_counts(const LabelMap& map);
/// Per-class pixel fractions; they sum to 1.
std::vector<double> class_statistics(const LabelMap& map);

/// C x (H*W) binary stack with channel c set where map == c.
template <typename Scalar>
FeatureMap<Scalar> one_hot(const LabelMap& map) {
  map.validate();
  FeatureMap<Scalar> out(map.num_classes, map.height(), map.width());
  const int w = map.width();
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < w; ++x) out.values(map(y, x), y * w + x) = Scalar(1);
  return out;
}

/// Per-pixel argmax over channels (first maximum wins on ties).
template <typename Scalar>
LabelMap argmax_labels(const FeatureMap<Scalar>& probs) {
  LabelMap out(probs.height, probs.width, probs.channels());
  for (int p = 0; p < probs.pixels(); ++p) {
    Eigen::Index best = 0;
    probs.values.col(p).maxCoeff(&best);
    out.values(p / probs.width, p % probs.width) = static_cast<std::int32_t>(best);
  }
  return out;
}

}  // namespace scenegan
