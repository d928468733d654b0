#pragma once

// Unsupervised edit directions: harvest per-class style vectors, run PCA per
// (class, layer), and move styles along the principal axes, s' = s + V^T y.

#include "scenegan/generator.hpp"
#include "scenegan/nn.hpp"
#include "scenegan/random.hpp"
#include "scenegan/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace scenegan {

/// What gets harvested for PCA: the style s_{c,l}, the w component feeding layer l
/// (per-class W+), or the full concatenated (base, shape, texture) latent.
enum class HarvestTarget { Style, WPlus, GlobalW };

std::string to_string(HarvestTarget target);
HarvestTarget parse_harvest_target(const std::string& name);

struct StyleSampleMatrix {
  int cls = 0;
  int layer = 0;
  HarvestTarget target = HarvestTarget::Style;
  Matrix<double> samples;  // N x dim
};

/// N independent draws z_i (stream derive_seed(seed, i)) pushed through the model.
/// Requires N >= dim so the covariance is well posed.
template <typename Scalar>
StyleSampleMatrix collect_styles(const Generator<Scalar>& g, int n, int cls, int layer, std::uint64_t seed,
                                 HarvestTarget target = HarvestTarget::Style);

struct DirectionEntry {
  int cls = 0;
  int layer = 0;
  HarvestTarget target = HarvestTarget::Style;
  Vector<double> mean;
  Matrix<double> basis;       // k x dim, orthonormal rows
  Vector<double> variances;   // descending
  int degenerate = 0;         // trailing components with ~zero variance

  int k() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
};

/// Top-k eigenpairs of the unbiased sample covariance. Each basis row is
/// flipped so that its largest-magnitude entry is positive.
DirectionEntry pca(const Matrix<double>& samples, int k);
DirectionEntry pca(const StyleSampleMatrix& samples, int k);

/// s' = s + V^T y.
Vector<double> edit(const Vector<double>& style, const DirectionEntry& entry, const Vector<double>& y);

class DirectionBank {
 public:
  std::vector<DirectionEntry> entries;

  const DirectionEntry* find(int cls, int layer) const;
  const DirectionEntry& at(int cls, int layer) const;
  bool empty() const { return entries.empty(); }

  void save(const std::filesystem::path& path) const;
  static DirectionBank load(const std::filesystem::path& path);
};

/// Harvests and decomposes every requested (class, layer).
template <typename Scalar>
DirectionBank discover_directions(const Generator<Scalar>& g, const std::vector<int>& classes, const std::vector<int>& layers,
                                  int n, int k, std::uint64_t seed, HarvestTarget target = HarvestTarget::Style);

struct EditItem {
  int cls = 0;
  int layer = 0;
  Vector<double> y;
};

struct EditSpec {
  std::vector<EditItem> items;

  /// {"edits": [{"class": c, "layer": l, "y": [...]}, ...]}; an item may instead give
  /// "component" and "magnitude", which expand to a one-hot y of the entry's size.
  static EditSpec from_json(const nlohmann::json& doc, const DirectionBank& bank);
  nlohmann::json to_json() const;
  void validate(const DirectionBank& bank) const;
};

/// Style bank of `per_class` with every edit applied in order.
template <typename Scalar>
StyleBank<Scalar> edited_styles(const Generator<Scalar>& g, const std::vector<LatentTriple<Scalar>>& per_class,
                                const DirectionBank& bank, const EditSpec& spec);

template <typename Scalar>
CompositionResult<Scalar> apply_edit(const Generator<Scalar>& g, const std::vector<LatentTriple<Scalar>>& per_class,
                                     const DirectionBank& bank, const EditSpec& spec);

/// Latents of the scene identified by `seed`: one z drawn from Rng(seed), mapped
/// once and shared by every class.
template <typename Scalar>
std::vector<LatentTriple<Scalar>> scene_latents(const Generator<Scalar>& g, std::uint64_t seed) {
  Rng rng(seed);
  const auto triple = g.map_latent(nn::normal_vector<Scalar>(rng, g.config().latent_dim, 1.0));
  return std::vector<LatentTriple<Scalar>>(static_cast<std::size_t>(g.config().num_classes), triple);
}

}  // namespace scenegan
