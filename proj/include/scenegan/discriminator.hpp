#pragma once

#include "scenegan/nn.hpp"
#include "scenegan/spectral_norm.hpp"
#include "scenegan/tensor.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace scenegan {

struct DiscriminatorConfig {
  int resolution = 64;
  int mask_channels = 16;
  int image_channels = 3;
  /// Width of each stride-2 stage. Stages before `fusion_stage` run once per branch.
  std::vector<int> channels{16, 32, 32, 32};
  int fusion_stage = 1;
  bool spectral_norm = true;
  int power_iterations = 1;

  int stages() const { return static_cast<int>(channels.size()); }
  int score_resolution() const { return resolution >> stages(); }
  void validate() const;
};

template <typename Scalar>
struct DiscriminatorTrace {
  std::vector<FeatureMap<Scalar>> inputs;  // per conv, in conv order
  std::vector<FeatureMap<Scalar>> pre;
};

/// Two-branch (image, mask) discriminator fused by channel concatenation, ending
/// in a pointwise score head that yields a patch score map. All convolutions
/// except the score head are spectrally normalized when enabled.
template <typename Scalar>
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& config, std::uint64_t seed);

  const DiscriminatorConfig& config() const { return config_; }
  nn::ParameterSet<Scalar>& parameters() { return params_; }
  const nn::ParameterSet<Scalar>& parameters() const { return params_; }

  FeatureMap<Scalar> score_map(const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask) const;
  Scalar score(const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask) const;

  FeatureMap<Scalar> forward(const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask,
                             DiscriminatorTrace<Scalar>& trace) const;
  /// Back-propagates a score-map gradient. Returns (d_image, d_mask). Parameter
  /// gradients are staged until flush_gradients() when `accumulate` is set.
  std::pair<FeatureMap<Scalar>, FeatureMap<Scalar>> backward(const DiscriminatorTrace<Scalar>& trace,
                                                             const FeatureMap<Scalar>& d_score, bool accumulate,
                                                             bool need_input_grad = true);
  /// Converts staged effective-weight gradients into raw parameter gradients.
  void flush_gradients();
  void discard_gradients();

  /// Runs power iterations on every normalized weight and recomputes the
  /// effective weights. Call after every parameter change (0 iterations re-uses u, v).
  void refresh(int iterations);

  int conv_count() const { return static_cast<int>(convs_.size()); }
  bool is_normalized(int conv) const { return config_.spectral_norm && conv < conv_count() - 1; }
  const Matrix<Scalar>& effective_weight(int conv) const { return weights_[static_cast<std::size_t>(conv)]; }
  const nn::Conv& conv(int i) const { return convs_[static_cast<std::size_t>(i)]; }
  std::vector<PowerIteration<Scalar>>& power_states() { return power_; }
  const std::vector<PowerIteration<Scalar>>& power_states() const { return power_; }

 private:
  DiscriminatorConfig config_;
  nn::ParameterSet<Scalar> params_;
  std::vector<nn::Conv> convs_;  // image branch, mask branch, joint stages, score head
  std::vector<PowerIteration<Scalar>> power_;
  std::vector<Matrix<Scalar>> weights_;
  std::vector<Matrix<Scalar>> staged_;
  int branch_ = 1;
};

extern template class Discriminator<float>;
extern template class Discriminator<double>;

}  // namespace scenegan
