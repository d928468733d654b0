#include "scenegan/discriminator.hpp"

#include "scenegan/random.hpp"

namespace scenegan {

void DiscriminatorConfig::validate() const {
  require(resolution > 0 && mask_channels > 0 && image_channels > 0, "discriminator: sizes must be positive");
  require(stages() >= 3, "discriminator: need at least three stages");
  require(fusion_stage >= 1 && 2 * fusion_stage < stages(),
          "discriminator: branches must fuse before half of the stages");
  require((resolution >> stages()) >= 1 && ((resolution >> stages()) << stages()) == resolution,
          "discriminator: resolution must be divisible by 2^stages");
  require(power_iterations >= 1, "discriminator: power_iterations must be >= 1");
  for (int c : channels) require(c > 0, "discriminator: channel widths must be positive");
}

template <typename Scalar>
Discriminator<Scalar>::Discriminator(const DiscriminatorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  branch_ = config_.fusion_stage;
  const auto& ch = config_.channels;
  for (int branch = 0; branch < 2; ++branch) {
    int in = branch == 0 ? config_.image_channels : config_.mask_channels;
    const std::string prefix = branch == 0 ? "image" : "mask";
    for (int s = 0; s < branch_; ++s) {
      convs_.push_back(nn::make_conv(params_, prefix + ".conv" + std::to_string(s), in, ch[static_cast<std::size_t>(s)], 3, 2, rng));
      in = ch[static_cast<std::size_t>(s)];
    }
  }
  int in = 2 * ch[static_cast<std::size_t>(branch_ - 1)];
  for (int s = branch_; s < config_.stages(); ++s) {
    convs_.push_back(nn::make_conv(params_, "joint.conv" + std::to_string(s), in, ch[static_cast<std::size_t>(s)], 3, 2, rng));
    in = ch[static_cast<std::size_t>(s)];
  }
  convs_.push_back(nn::make_conv(params_, "score", in, 1, 1, 1, rng));

  for (const auto& c : convs_) power_.push_back(make_power_iteration<Scalar>(c.out, c.in * c.kernel * c.kernel, rng));
  weights_.resize(convs_.size());
  staged_.resize(convs_.size());
  refresh(config_.power_iterations);
}

template <typename Scalar>
void Discriminator<Scalar>::refresh(int iterations) {
  for (int i = 0; i < conv_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Matrix<Scalar> raw = params_.matrix(convs_[ui].weight);
    if (is_normalized(i)) {
      weights_[ui] = spectral_normalize(raw, power_[ui], iterations);
    } else {
      weights_[ui] = raw * static_cast<Scalar>(convs_[ui].scale());
    }
  }
}

template <typename Scalar>
FeatureMap<Scalar> Discriminator<Scalar>::forward(const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask,
                                                  DiscriminatorTrace<Scalar>& trace) const {
  require(image.channels() == config_.image_channels, "discriminator: image channel mismatch");
  require(mask.channels() == config_.mask_channels,
          "discriminator: mask has " + std::to_string(mask.channels()) + " channels, expected " +
              std::to_string(config_.mask_channels));
  require(image.height == config_.resolution && image.width == config_.resolution && mask.height == image.height &&
              mask.width == image.width,
          "discriminator: image and mask must share the configured resolution");
  trace.inputs.clear();
  trace.pre.clear();
  auto run = [&](std::size_t i, FeatureMap<Scalar> x) {
    FeatureMap<Scalar> pre = nn::conv_forward(weights_[i], params_[convs_[i].bias].value, convs_[i], x);
    trace.inputs.push_back(std::move(x));
    FeatureMap<Scalar> act(nn::leaky_relu(pre.values), pre.height, pre.width);
    trace.pre.push_back(std::move(pre));
    return act;
  };
  const auto b = static_cast<std::size_t>(branch_);
  FeatureMap<Scalar> xi = image;
  for (std::size_t s = 0; s < b; ++s) xi = run(s, std::move(xi));
  FeatureMap<Scalar> xm = mask;
  for (std::size_t s = 0; s < b; ++s) xm = run(b + s, std::move(xm));

  FeatureMap<Scalar> x(xi.channels() + xm.channels(), xi.height, xi.width);
  x.values.topRows(xi.channels()) = xi.values;
  x.values.bottomRows(xm.channels()) = xm.values;
  for (std::size_t i = 2 * b; i + 1 < convs_.size(); ++i) x = run(i, std::move(x));

  const std::size_t last = convs_.size() - 1;
  FeatureMap<Scalar> score = nn::conv_forward(weights_[last], params_[convs_[last].bias].value, convs_[last], x);
  trace.inputs.push_back(std::move(x));
  trace.pre.push_back(score);
  return score;
}

template <typename Scalar>
FeatureMap<Scalar> Discriminator<Scalar>::score_map(const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask) const {
  DiscriminatorTrace<Scalar> trace;
  return forward(image, mask, trace);
}

template <typename Scalar>
Scalar Discriminator<Scalar>::score(const FeatureMap<Scalar>& image, const FeatureMap<Scalar>& mask) const {
  return score_map(image, mask).values.mean();
}

template <typename Scalar>
std::pair<FeatureMap<Scalar>, FeatureMap<Scalar>> Discriminator<Scalar>::backward(const DiscriminatorTrace<Scalar>& trace,
                                                                                  const FeatureMap<Scalar>& d_score,
                                                                                  bool accumulate, bool need_input_grad) {
  auto step = [&](std::size_t i, const FeatureMap<Scalar>& grad, bool input_grad) {
    auto& conv = convs_[i];
    if (accumulate && staged_[i].size() == 0) staged_[i] = Matrix<Scalar>::Zero(weights_[i].rows(), weights_[i].cols());
    return nn::conv_backward(weights_[i], conv, trace.inputs[i], grad, accumulate ? &staged_[i] : nullptr,
                             accumulate ? &params_[conv.bias].grad : nullptr, input_grad);
  };
  const std::size_t last = convs_.size() - 1;
  const auto b = static_cast<std::size_t>(branch_);
  FeatureMap<Scalar> grad = step(last, d_score, true);
  for (std::size_t i = last; i-- > 2 * b;) {
    nn::leaky_relu_backward(trace.pre[i].values, grad.values);
    grad = step(i, grad, true);
  }
  const int image_rows = convs_[b - 1].out;
  FeatureMap<Scalar> gi(grad.values.topRows(image_rows), grad.height, grad.width);
  FeatureMap<Scalar> gm(grad.values.bottomRows(grad.channels() - image_rows), grad.height, grad.width);
  for (std::size_t s = b; s-- > 0;) {
    nn::leaky_relu_backward(trace.pre[s].values, gi.values);
    gi = step(s, gi, need_input_grad || s > 0);
    nn::leaky_relu_backward(trace.pre[b + s].values, gm.values);
    gm = step(b + s, gm, need_input_grad || s > 0);
  }
  return {std::move(gi), std::move(gm)};
}

template <typename Scalar>
void Discriminator<Scalar>::flush_gradients() {
  for (int i = 0; i < conv_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (staged_[ui].size() == 0) continue;
    if (is_normalized(i)) {
      params_.grad_matrix(convs_[ui].weight) += spectral_norm_backward(staged_[ui], weights_[ui], power_[ui]);
    } else {
      params_.grad_matrix(convs_[ui].weight) += staged_[ui] * static_cast<Scalar>(convs_[ui].scale());
    }
    staged_[ui].setZero();
  }
}

template <typename Scalar>
void Discriminator<Scalar>::discard_gradients() {
  for (auto& s : staged_)
    if (s.size() != 0) s.setZero();
}

template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace scenegan
