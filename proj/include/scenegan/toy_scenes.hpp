#pragma once

// Procedural street-like scenes with pixel-exact label maps. Scenes are drawn
// with 24 fine classes that group into 8 super-classes (see toy_remap_table()).

#include "scenegan/class_grouping.hpp"
#include "scenegan/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scenegan {

struct BandRange {
  double min_fraction = 0.0;
  double max_fraction = 0.0;
};

struct CountRange {
  int min = 0;
  int max = 0;
};

struct ToySceneSpec {
  int resolution = 64;
  BandRange sky_band{0.28, 0.38};
  BandRange road_band{0.26, 0.34};
  CountRange buildings{1, 3};
  CountRange trees{0, 2};
  CountRange cars{1, 3};
  CountRange people{1, 2};
  CountRange poles{1, 2};
  double color_jitter = 0.08;

  void validate() const;
};

inline constexpr int kToyFineClasses = 24;
inline constexpr int kToySuperClasses = 8;

/// Names of the fine classes, indexed by label value.
const std::vector<std::string>& toy_class_names();
/// The 24 -> 8 grouping of the toy classes (sky, road, ground, building, vegetation, car, person, pole).
RemapTable toy_remap_table();

LabeledImage make_toy_scene(const ToySceneSpec& spec, std::uint64_t seed);
/// Sample i is drawn from a stream derived from (seed, i), so prefixes of larger corpora agree.
Dataset make_toy_corpus(const ToySceneSpec& spec, int count, std::uint64_t seed);

}  // namespace scenegan
