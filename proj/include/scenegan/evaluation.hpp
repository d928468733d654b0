#pragma once

// Frechet distance over feature statistics, mIoU, and the pluggable feature
// extractor / segmenter interfaces used to score generated scenes.

#include "scenegan/class_grouping.hpp"
#include "scenegan/dataset.hpp"
#include "scenegan/tensor.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace scenegan {

struct FeatureStats {
  Vector<double> mean;
  Matrix<double> covariance;
  std::int64_t count = 0;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Unbiased mean/covariance of the rows of `samples` (N x d). Needs N >= d + 1.
FeatureStats feature_stats(const Matrix<double>& samples);

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}). The trace of the square
/// root is taken from the eigenvalues of sqrt(S_a) S_b sqrt(S_a); eigenvalues above
/// -1e-6 are clamped to zero, anything more negative is an input error.
double frechet_distance(const FeatureStats& a, const FeatureStats& b);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int dim() const = 0;
  virtual Vector<double> extract(const Image& image) const = 0;
};

/// Feature vector = raw pixel values, channel-major.
class PixelFlattenExtractor final : public FeatureExtractor {
 public:
  PixelFlattenExtractor(int channels, int height, int width) : dim_(channels * height * width) {}
  int dim() const override { return dim_; }
  Vector<double> extract(const Image& image) const override;

 private:
  int dim_;
};

/// Frozen random conv net: three stride-2 3x3 convs with leaky ReLU; the
/// feature vector concatenates the spatial means and standard deviations of
/// every stage. Weights come straight from the raw 64-bit engine output so
/// they are identical on every platform.
class ProxyExtractor final : public FeatureExtractor {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x5eed'f1d0ULL;

  explicit ProxyExtractor(std::uint64_t seed = kDefaultSeed, std::vector<int> widths = {16, 24, 32});
  int dim() const override { return dim_; }
  Vector<double> extract(const Image& image) const override;

 private:
  struct Layer {
    int in = 0, out = 0;
    Matrix<double> weight;  // out x in*9
    Vector<double> bias;
  };
  std::vector<Layer> layers_;
  int dim_ = 0;
};

FeatureStats feature_stats(const std::vector<Image>& images, const FeatureExtractor& extractor);

/// Mean IoU over classes present in either map.
double miou(const LabelMap& pred, const LabelMap& gt, int num_classes);
/// Accumulated over a whole set (per-class intersections and unions summed first).
double miou(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt, int num_classes);

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual int num_classes() const = 0;
  virtual LabelMap segment(const Image& image) const = 0;
};

/// Per-class Gaussian over color and image row (diagonal covariance) with a class prior,
/// fit on labeled images; predicts the maximum-posterior class per pixel.
class ColorSegmenter final : public Segmenter {
 public:
  static ColorSegmenter fit(const Dataset& data, int num_classes);
  int num_classes() const override { return static_cast<int>(mean_.rows()); }
  LabelMap segment(const Image& image) const override;

 private:
  Matrix<double> mean_;      // C x 4: RGB and row
  Matrix<double> variance_;  // C x 4: RGB and row
  Vector<double> log_prior_;
};

/// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace scenegan
