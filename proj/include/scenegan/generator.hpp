#pragma once

// Compositional generator: a shared mapping network produces the factorized
// latent (base, shape, texture); per-class style heads turn it into style
// vectors s_{c,l}; per-class local generators turn Fourier features into a
// feature map and a depth map; a softmax over depths fuses the classes; a
// renderer upsamples the fused features into an image and a final mask.

#include "scenegan/nn.hpp"
#include "scenegan/tensor.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace scenegan {

struct GeneratorConfig {
  static constexpr int kLayers = 10;

  int num_classes = 16;
  int latent_dim = 64;
  int style_dim = 64;
  int coarse_resolution = 16;
  int output_resolution = 64;
  int fourier_features = 32;
  int local_channels = 32;
  int feature_channels = 32;
  /// One width per renderer stage: a conv at the coarse resolution, then one per x2 upsampling.
  std::vector<int> render_channels{32, 32, 16};
  int mapping_layers = 2;
  double mapping_lr_multiplier = 0.01;

  int upsampling_stages() const;
  void validate() const;
};

enum class LatentGroup { Base = 0, Shape = 1, Texture = 2 };

/// Layers 0-1 read w_base, 2-5 w_shape, 6-9 w_texture.
constexpr LatentGroup layer_group(int layer) {
  return layer <= 1 ? LatentGroup::Base : (layer <= 5 ? LatentGroup::Shape : LatentGroup::Texture);
}

/// The depth head reads the output of this layer; later layers only shape features.
inline constexpr int kLastDepthLayer = 5;
inline constexpr int kShapeEditLayer = 5;
inline constexpr int kTextureEditLayer = 9;

template <typename Scalar>
struct LatentTriple {
  Vector<Scalar> z;
  Vector<Scalar> base;
  Vector<Scalar> shape;
  Vector<Scalar> texture;

  const Vector<Scalar>& component(LatentGroup g) const {
    return g == LatentGroup::Base ? base : (g == LatentGroup::Shape ? shape : texture);
  }
  Vector<Scalar>& component(LatentGroup g) {
    return g == LatentGroup::Base ? base : (g == LatentGroup::Shape ? shape : texture);
  }
};

/// All style vectors of one sample, class-major.
template <typename Scalar>
struct StyleBank {
  int num_classes = 0;
  std::vector<Vector<Scalar>> styles;
  std::vector<int> assignment;  // class -> index of the latent triple that produced its styles

  StyleBank() = default;
  StyleBank(int classes, int style_dim)
      : num_classes(classes),
        styles(static_cast<std::size_t>(classes * GeneratorConfig::kLayers), Vector<Scalar>::Zero(style_dim)),
        assignment(static_cast<std::size_t>(classes), 0) {}

  Vector<Scalar>& at(int cls, int layer) { return styles[index(cls, layer)]; }
  const Vector<Scalar>& at(int cls, int layer) const { return styles[index(cls, layer)]; }

 private:
  std::size_t index(int cls, int layer) const {
    require(cls >= 0 && cls < num_classes, "class index out of range");
    require(layer >= 0 && layer < GeneratorConfig::kLayers, "layer index out of range");
    return static_cast<std::size_t>(cls * GeneratorConfig::kLayers + layer);
  }
};

template <typename Scalar>
struct LocalOutput {
  Matrix<Scalar> features;  // feature_channels x coarse^2
  Matrix<Scalar> depth;     // 1 x coarse^2
};

template <typename Scalar>
struct CompositionResult {
  Matrix<Scalar> depth;                  // C x coarse^2
  std::vector<Matrix<Scalar>> features;  // C maps of feature_channels x coarse^2
  Matrix<Scalar> mask;                   // C x coarse^2, softmax of depth over classes
  Matrix<Scalar> fused;                  // feature_channels x coarse^2
  FeatureMap<Scalar> image;              // 3 x output^2 in [-1, 1]
  FeatureMap<Scalar> final_mask;         // C x output^2, sums to 1 per pixel
  int coarse_resolution = 0;
};

/// Pixelwise softmax of the stacked depths (C x P) and the mask-weighted feature sum.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> compose(const Matrix<Scalar>& depths, std::span<const Matrix<Scalar>> features) {
  require(static_cast<std::size_t>(depths.rows()) == features.size(), "compose: one feature map per class required");
  require(!features.empty(), "compose: no classes");
  for (const auto& f : features)
    require(f.cols() == depths.cols() && f.rows() == features.front().rows(), "compose: resolution mismatch");
  Matrix<Scalar> mask = nn::softmax_channels(depths);
  Matrix<Scalar> fused = Matrix<Scalar>::Zero(features.front().rows(), depths.cols());
  for (std::size_t c = 0; c < features.size(); ++c)
    fused.noalias() += features[c] * mask.row(static_cast<Eigen::Index>(c)).asDiagonal();
  return {std::move(mask), std::move(fused)};
}

/// Sine/cosine positional encoding over the coarse grid: fourier_features x coarse^2.
template <typename Scalar>
Matrix<Scalar> fourier_grid(int features, int resolution);

template <typename Scalar>
struct LocalTrace {
  std::array<Matrix<Scalar>, GeneratorConfig::kLayers + 1> activations;  // [l] is the input of layer l
  std::array<Matrix<Scalar>, GeneratorConfig::kLayers> pre;
  std::array<nn::ModulatedCache<Scalar>, GeneratorConfig::kLayers> caches;
};

template <typename Scalar>
struct MappingTrace {
  std::vector<Vector<Scalar>> inputs;  // trunk layer inputs; back() is the trunk output
  std::vector<Vector<Scalar>> pre;
};

/// Every intermediate needed to back-propagate one generated sample.
template <typename Scalar>
struct GeneratorTrace {
  bool from_latents = false;
  std::vector<LatentTriple<Scalar>> triples;
  std::vector<MappingTrace<Scalar>> mapping;
  StyleBank<Scalar> styles;
  std::vector<Vector<Scalar>> style_pre;
  std::vector<LocalTrace<Scalar>> local;
  std::vector<FeatureMap<Scalar>> render_inputs;
  std::vector<FeatureMap<Scalar>> render_pre;
  FeatureMap<Scalar> render_out;
  CompositionResult<Scalar> result;
};

template <typename Scalar>
class Generator {
 public:
  Generator(const GeneratorConfig& config, std::uint64_t seed);

  const GeneratorConfig& config() const { return config_; }
  nn::ParameterSet<Scalar>& parameters() { return params_; }
  const nn::ParameterSet<Scalar>& parameters() const { return params_; }

  LatentTriple<Scalar> map_latent(const Vector<Scalar>& z) const;
  std::vector<LatentTriple<Scalar>> map_latent(const std::vector<Vector<Scalar>>& zs) const;

  Vector<Scalar> style_vector(const LatentTriple<Scalar>& triple, int cls, int layer) const;
  std::vector<Vector<Scalar>> style_vectors(const LatentTriple<Scalar>& triple, int cls) const;
  StyleBank<Scalar> style_bank(const LatentTriple<Scalar>& triple) const;
  StyleBank<Scalar> style_bank(const std::vector<LatentTriple<Scalar>>& per_class) const;

  const Matrix<Scalar>& fourier() const { return fourier_; }
  LocalOutput<Scalar> local_generate(int cls, const std::vector<Vector<Scalar>>& styles) const;
  /// Image and final mask from fused features; the mask logits add the upsampled depths.
  std::pair<FeatureMap<Scalar>, FeatureMap<Scalar>> render(const Matrix<Scalar>& fused, const Matrix<Scalar>& depth) const;

  CompositionResult<Scalar> generate(const LatentTriple<Scalar>& shared) const;
  CompositionResult<Scalar> generate(const std::vector<LatentTriple<Scalar>>& per_class) const;
  CompositionResult<Scalar> generate(const StyleBank<Scalar>& styles) const;

  /// Traced forward passes for training.
  const CompositionResult<Scalar>& forward(const Vector<Scalar>& z, GeneratorTrace<Scalar>& trace) const;
  const CompositionResult<Scalar>& forward(const std::vector<LatentTriple<Scalar>>& per_class,
                                           GeneratorTrace<Scalar>& trace) const;
  const CompositionResult<Scalar>& forward(const StyleBank<Scalar>& styles, GeneratorTrace<Scalar>& trace) const;

  /// Accumulates parameter gradients for a loss with the given output gradients and
  /// returns the gradient with respect to every style vector.
  StyleBank<Scalar> backward(const GeneratorTrace<Scalar>& trace, const FeatureMap<Scalar>& d_image,
                             const FeatureMap<Scalar>& d_final_mask);

 private:
  LatentTriple<Scalar> map_latent(const Vector<Scalar>& z, MappingTrace<Scalar>* trace) const;
  void forward_styles(GeneratorTrace<Scalar>& trace) const;
  void forward_from_styles(GeneratorTrace<Scalar>& trace) const;
  void local_forward(int cls, GeneratorTrace<Scalar>& trace) const;
  Matrix<Scalar> render_weight(std::size_t i) const;

  GeneratorConfig config_;
  nn::ParameterSet<Scalar> params_;
  std::vector<nn::Affine> mapping_;
  std::array<nn::Affine, 3> mapping_heads_;
  std::vector<nn::Affine> style_heads_;  // class-major, kLayers per class
  std::vector<nn::Modulated> local_;     // class-major, kLayers per class
  std::vector<nn::Affine> depth_heads_;
  std::vector<nn::Affine> feature_heads_;
  std::vector<nn::Conv> render_convs_;
  nn::Affine to_rgb_;
  nn::Affine to_seg_;
  Matrix<Scalar> fourier_;
};

extern template class Generator<float>;
extern template class Generator<double>;

}  // namespace scenegan
