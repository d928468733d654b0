#include "scenegan/generator.hpp"

#include "scenegan/random.hpp"

#include <cmath>
#include <numbers>

namespace scenegan {

int GeneratorConfig::upsampling_stages() const {
  int stages = 0;
  int r = coarse_resolution;
  while (r < output_resolution) {
    r *= 2;
    ++stages;
  }
  return stages;
}

void GeneratorConfig::validate() const {
  require(num_classes >= 2, "generator: need at least two classes");
  require(latent_dim > 0 && style_dim > 0, "generator: latent and style dims must be positive");
  require(coarse_resolution > 0, "generator: coarse resolution must be positive");
  require(output_resolution == (coarse_resolution << upsampling_stages()),
          "generator: output resolution must be coarse resolution times a power of two");
  require(fourier_features > 0 && fourier_features % 4 == 0, "generator: fourier feature count must be a multiple of 4");
  require(local_channels > 0 && feature_channels > 0, "generator: channel widths must be positive");
  require(static_cast<int>(render_channels.size()) == upsampling_stages() + 1,
          "generator: render_channels needs one width per renderer stage");
  require(mapping_layers >= 1, "generator: mapping network needs at least one layer");
}

template <typename Scalar>
Matrix<Scalar> fourier_grid(int features, int resolution) {
  const int bands = features / 4;
  // highest band at a quarter of the grid rate; the Nyquist band is a bare checkerboard
  const double top = std::log2(std::max(resolution / 4.0, 1.0));
  Matrix<Scalar> grid(features, resolution * resolution);
  for (int b = 0; b < bands; ++b) {
    const double freq = std::exp2(bands > 1 ? top * b / (bands - 1) : 0.0);
    for (int y = 0; y < resolution; ++y) {
      for (int x = 0; x < resolution; ++x) {
        const double u = 2.0 * std::numbers::pi * freq * (x + 0.5) / resolution;
        const double v = 2.0 * std::numbers::pi * freq * (y + 0.5) / resolution;
        const int p = y * resolution + x;
        grid(4 * b + 0, p) = static_cast<Scalar>(std::sin(u));
        grid(4 * b + 1, p) = static_cast<Scalar>(std::cos(u));
        grid(4 * b + 2, p) = static_cast<Scalar>(std::sin(v));
        grid(4 * b + 3, p) = static_cast<Scalar>(std::cos(v));
      }
    }
  }
  return grid;
}

template Matrix<float> fourier_grid<float>(int, int);
template Matrix<double> fourier_grid<double>(int, int);

template <typename Scalar>
Generator<Scalar>::Generator(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int latent = config_.latent_dim;
  const double lr_mul = config_.mapping_lr_multiplier;
  for (int i = 0; i < config_.mapping_layers; ++i)
    mapping_.push_back(nn::make_affine(params_, "mapping." + std::to_string(i), latent, latent, rng, lr_mul));
  const char* head_names[] = {"base", "shape", "texture"};
  for (int g = 0; g < 3; ++g)
    mapping_heads_[static_cast<std::size_t>(g)] =
        nn::make_affine(params_, std::string("mapping.head_") + head_names[g], latent, latent, rng, lr_mul);

  const int width = config_.local_channels;
  for (int c = 0; c < config_.num_classes; ++c) {
    const std::string prefix = "local." + std::to_string(c);
    for (int l = 0; l < GeneratorConfig::kLayers; ++l) {
      const std::string layer = prefix + ".layer" + std::to_string(l);
      style_heads_.push_back(nn::make_affine(params_, layer + ".style_mlp", latent, config_.style_dim, rng));
      const int in = l == 0 ? config_.fourier_features : width;
      local_.push_back(nn::make_modulated(params_, layer + ".conv", config_.style_dim, in, width, rng));
    }
    depth_heads_.push_back(nn::make_affine(params_, prefix + ".depth_head", width, 1, rng, 1.0, 0.0, 0.0));
    feature_heads_.push_back(nn::make_affine(params_, prefix + ".feature_head", width, config_.feature_channels, rng));
  }

  int in = config_.feature_channels;
  for (std::size_t i = 0; i < config_.render_channels.size(); ++i) {
    const int out = config_.render_channels[i];
    render_convs_.push_back(nn::make_conv(params_, "render.conv" + std::to_string(i), in, out, 3, 1, rng));
    in = out;
  }
  to_rgb_ = nn::make_affine(params_, "render.to_rgb", in, 3, rng);
  to_seg_ = nn::make_affine(params_, "render.to_seg", in, config_.num_classes, rng, 1.0, 0.0, 0.0);
  fourier_ = fourier_grid<Scalar>(config_.fourier_features, config_.coarse_resolution);
}

template <typename Scalar>
LatentTriple<Scalar> Generator<Scalar>::map_latent(const Vector<Scalar>& z, MappingTrace<Scalar>* trace) const {
  require(z.size() == config_.latent_dim, "map_latent: z has " + std::to_string(z.size()) + " entries, expected " +
                                              std::to_string(config_.latent_dim));
  LatentTriple<Scalar> out;
  out.z = z;
  const Scalar rms = std::sqrt(z.squaredNorm() / static_cast<Scalar>(z.size()) + Scalar(1e-8));
  Vector<Scalar> x = z / rms;
  for (const auto& layer : mapping_) {
    Vector<Scalar> pre = nn::affine_forward(params_, layer, x).col(0);
    if (trace) {
      trace->inputs.push_back(x);
      trace->pre.push_back(pre);
    }
    x = nn::leaky_relu(pre);
  }
  if (trace) trace->inputs.push_back(x);
  out.base = nn::affine_forward(params_, mapping_heads_[0], x).col(0);
  out.shape = nn::affine_forward(params_, mapping_heads_[1], x).col(0);
  out.texture = nn::affine_forward(params_, mapping_heads_[2], x).col(0);
  return out;
}

template <typename Scalar>
LatentTriple<Scalar> Generator<Scalar>::map_latent(const Vector<Scalar>& z) const {
  return map_latent(z, nullptr);
}

template <typename Scalar>
std::vector<LatentTriple<Scalar>> Generator<Scalar>::map_latent(const std::vector<Vector<Scalar>>& zs) const {
  std::vector<LatentTriple<Scalar>> out;
  out.reserve(zs.size());
  for (const auto& z : zs) out.push_back(map_latent(z, nullptr));
  return out;
}

template <typename Scalar>
Vector<Scalar> Generator<Scalar>::style_vector(const LatentTriple<Scalar>& triple, int cls, int layer) const {
  require(cls >= 0 && cls < config_.num_classes, "class index " + std::to_string(cls) + " out of range");
  require(layer >= 0 && layer < GeneratorConfig::kLayers, "layer index out of range");
  const auto& head = style_heads_[static_cast<std::size_t>(cls * GeneratorConfig::kLayers + layer)];
  return nn::leaky_relu(nn::affine_forward(params_, head, triple.component(layer_group(layer))).col(0));
}

template <typename Scalar>
std::vector<Vector<Scalar>> Generator<Scalar>::style_vectors(const LatentTriple<Scalar>& triple, int cls) const {
  std::vector<Vector<Scalar>> out;
  for (int l = 0; l < GeneratorConfig::kLayers; ++l) out.push_back(style_vector(triple, cls, l));
  return out;
}

template <typename Scalar>
StyleBank<Scalar> Generator<Scalar>::style_bank(const LatentTriple<Scalar>& triple) const {
  return style_bank(std::vector<LatentTriple<Scalar>>(static_cast<std::size_t>(config_.num_classes), triple));
}

template <typename Scalar>
StyleBank<Scalar> Generator<Scalar>::style_bank(const std::vector<LatentTriple<Scalar>>& per_class) const {
  GeneratorTrace<Scalar> trace;
  require(static_cast<int>(per_class.size()) == config_.num_classes, "style_bank: one latent triple per class required");
  trace.triples = per_class;
  trace.styles = StyleBank<Scalar>(config_.num_classes, config_.style_dim);
  for (int c = 0; c < config_.num_classes; ++c) trace.styles.assignment[static_cast<std::size_t>(c)] = c;
  forward_styles(trace);
  return trace.styles;
}

template <typename Scalar>
void Generator<Scalar>::forward_styles(GeneratorTrace<Scalar>& trace) const {
  const int layers = GeneratorConfig::kLayers;
  trace.style_pre.assign(static_cast<std::size_t>(config_.num_classes * layers), Vector<Scalar>());
  for (int c = 0; c < config_.num_classes; ++c) {
    const auto& triple = trace.triples[static_cast<std::size_t>(trace.styles.assignment[static_cast<std::size_t>(c)])];
    for (int l = 0; l < layers; ++l) {
      const auto idx = static_cast<std::size_t>(c * layers + l);
      trace.style_pre[idx] = nn::affine_forward(params_, style_heads_[idx], triple.component(layer_group(l))).col(0);
      trace.styles.at(c, l) = nn::leaky_relu(trace.style_pre[idx]);
    }
  }
}

template <typename Scalar>
void Generator<Scalar>::local_forward(int cls, GeneratorTrace<Scalar>& trace) const {
  auto& lt = trace.local[static_cast<std::size_t>(cls)];
  auto& result = trace.result;
  lt.activations[0] = fourier_;
  for (int l = 0; l < GeneratorConfig::kLayers; ++l) {
    const auto& layer = local_[static_cast<std::size_t>(cls * GeneratorConfig::kLayers + l)];
    const auto li = static_cast<std::size_t>(l);
    lt.pre[li] = nn::modulated_forward(params_, layer, trace.styles.at(cls, l), lt.activations[li], lt.caches[li]);
    lt.activations[li + 1] = nn::leaky_relu(lt.pre[li]);
  }
  const auto c = static_cast<std::size_t>(cls);
  result.depth.row(cls) = nn::affine_forward(params_, depth_heads_[c], lt.activations[kLastDepthLayer + 1]);
  result.features[c] = nn::affine_forward(params_, feature_heads_[c], lt.activations[GeneratorConfig::kLayers]);
}

template <typename Scalar>
LocalOutput<Scalar> Generator<Scalar>::local_generate(int cls, const std::vector<Vector<Scalar>>& styles) const {
  require(cls >= 0 && cls < config_.num_classes, "class index " + std::to_string(cls) + " out of range");
  require(static_cast<int>(styles.size()) == GeneratorConfig::kLayers,
          "local_generate: expected " + std::to_string(GeneratorConfig::kLayers) + " layer styles, got " +
              std::to_string(styles.size()));
  for (const auto& s : styles) require(s.size() == config_.style_dim, "local_generate: style has wrong dimension");
  GeneratorTrace<Scalar> trace;
  trace.styles = StyleBank<Scalar>(config_.num_classes, config_.style_dim);
  for (int l = 0; l < GeneratorConfig::kLayers; ++l) trace.styles.at(cls, l) = styles[static_cast<std::size_t>(l)];
  trace.local.resize(static_cast<std::size_t>(config_.num_classes));
  trace.result.depth = Matrix<Scalar>::Zero(config_.num_classes, fourier_.cols());
  trace.result.features.resize(static_cast<std::size_t>(config_.num_classes));
  local_forward(cls, trace);
  return {trace.result.features[static_cast<std::size_t>(cls)], trace.result.depth.row(cls)};
}

template <typename Scalar>
Matrix<Scalar> Generator<Scalar>::render_weight(std::size_t i) const {
  const auto& conv = render_convs_[i];
  return params_.matrix(conv.weight) * static_cast<Scalar>(conv.scale());
}

template <typename Scalar>
void Generator<Scalar>::forward_from_styles(GeneratorTrace<Scalar>& trace) const {
  const int classes = config_.num_classes;
  const int res = config_.coarse_resolution;
  auto& r = trace.result;
  r.coarse_resolution = res;
  trace.local.resize(static_cast<std::size_t>(classes));
  r.depth = Matrix<Scalar>::Zero(classes, res * res);
  r.features.assign(static_cast<std::size_t>(classes), Matrix<Scalar>());
  for (int c = 0; c < classes; ++c) local_forward(c, trace);
  std::tie(r.mask, r.fused) = compose<Scalar>(r.depth, r.features);

  trace.render_inputs.clear();
  trace.render_pre.clear();
  FeatureMap<Scalar> x(r.fused, res, res);
  for (std::size_t i = 0; i < render_convs_.size(); ++i) {
    if (i > 0) x = nn::upsample2x(x);
    const auto& conv = render_convs_[i];
    FeatureMap<Scalar> pre = nn::conv_forward(render_weight(i), params_[conv.bias].value, conv, x);
    trace.render_inputs.push_back(std::move(x));
    x = FeatureMap<Scalar>(nn::leaky_relu(pre.values), pre.height, pre.width);
    trace.render_pre.push_back(std::move(pre));
  }
  trace.render_out = x;
  const int out_res = x.height;
  r.image = FeatureMap<Scalar>(nn::affine_forward(params_, to_rgb_, x.values).array().tanh().matrix(), out_res, out_res);
  FeatureMap<Scalar> logits(r.depth, res, res);
  for (int s = 0; s < config_.upsampling_stages(); ++s) logits = nn::upsample2x(logits);
  logits.values += nn::affine_forward(params_, to_seg_, x.values);
  r.final_mask = FeatureMap<Scalar>(nn::softmax_channels(logits.values), out_res, out_res);
}

template <typename Scalar>
std::pair<FeatureMap<Scalar>, FeatureMap<Scalar>> Generator<Scalar>::render(const Matrix<Scalar>& fused,
                                                                             const Matrix<Scalar>& depth) const {
  const int res = config_.coarse_resolution;
  require(fused.rows() == config_.feature_channels && fused.cols() == res * res, "render: fused feature shape mismatch");
  require(depth.rows() == config_.num_classes && depth.cols() == res * res, "render: depth shape mismatch");
  FeatureMap<Scalar> x(fused, res, res);
  for (std::size_t i = 0; i < render_convs_.size(); ++i) {
    if (i > 0) x = nn::upsample2x(x);
    FeatureMap<Scalar> pre = nn::conv_forward(render_weight(i), params_[render_convs_[i].bias].value, render_convs_[i], x);
    x = FeatureMap<Scalar>(nn::leaky_relu(pre.values), pre.height, pre.width);
  }
  FeatureMap<Scalar> image(nn::affine_forward(params_, to_rgb_, x.values).array().tanh().matrix(), x.height, x.width);
  FeatureMap<Scalar> logits(depth, res, res);
  for (int s = 0; s < config_.upsampling_stages(); ++s) logits = nn::upsample2x(logits);
  logits.values += nn::affine_forward(params_, to_seg_, x.values);
  return {std::move(image), FeatureMap<Scalar>(nn::softmax_channels(logits.values), x.height, x.width)};
}

template <typename Scalar>
const CompositionResult<Scalar>& Generator<Scalar>::forward(const Vector<Scalar>& z, GeneratorTrace<Scalar>& trace) const {
  trace = GeneratorTrace<Scalar>();
  trace.from_latents = true;
  trace.mapping.resize(1);
  trace.triples.push_back(map_latent(z, &trace.mapping[0]));
  trace.styles = StyleBank<Scalar>(config_.num_classes, config_.style_dim);
  forward_styles(trace);
  forward_from_styles(trace);
  return trace.result;
}

template <typename Scalar>
const CompositionResult<Scalar>& Generator<Scalar>::forward(const std::vector<LatentTriple<Scalar>>& per_class,
                                                            GeneratorTrace<Scalar>& trace) const {
  require(static_cast<int>(per_class.size()) == config_.num_classes,
          "generate: every class needs an assigned latent triple");
  trace = GeneratorTrace<Scalar>();
  trace.triples = per_class;
  trace.styles = StyleBank<Scalar>(config_.num_classes, config_.style_dim);
  for (int c = 0; c < config_.num_classes; ++c) trace.styles.assignment[static_cast<std::size_t>(c)] = c;
  forward_styles(trace);
  forward_from_styles(trace);
  return trace.result;
}

template <typename Scalar>
const CompositionResult<Scalar>& Generator<Scalar>::forward(const StyleBank<Scalar>& styles,
                                                            GeneratorTrace<Scalar>& trace) const {
  require(styles.num_classes == config_.num_classes, "generate: style bank class count mismatch");
  for (const auto& s : styles.styles) require(s.size() == config_.style_dim, "generate: style has wrong dimension");
  trace = GeneratorTrace<Scalar>();
  trace.styles = styles;
  forward_from_styles(trace);
  return trace.result;
}

template <typename Scalar>
CompositionResult<Scalar> Generator<Scalar>::generate(const LatentTriple<Scalar>& shared) const {
  return generate(std::vector<LatentTriple<Scalar>>(static_cast<std::size_t>(config_.num_classes), shared));
}

template <typename Scalar>
CompositionResult<Scalar> Generator<Scalar>::generate(const std::vector<LatentTriple<Scalar>>& per_class) const {
  GeneratorTrace<Scalar> trace;
  forward(per_class, trace);
  return std::move(trace.result);
}

template <typename Scalar>
CompositionResult<Scalar> Generator<Scalar>::generate(const StyleBank<Scalar>& styles) const {
  GeneratorTrace<Scalar> trace;
  forward(styles, trace);
  return std::move(trace.result);
}

template <typename Scalar>
StyleBank<Scalar> Generator<Scalar>::backward(const GeneratorTrace<Scalar>& trace, const FeatureMap<Scalar>& d_image,
                                              const FeatureMap<Scalar>& d_final_mask) {
  const auto& r = trace.result;
  const int classes = config_.num_classes;
  const int res = config_.coarse_resolution;
  const int layers = GeneratorConfig::kLayers;

  // Output heads.
  const Matrix<Scalar> d_rgb =
      d_image.values.cwiseProduct((Scalar(1) - r.image.values.array().square()).matrix());
  const Matrix<Scalar> d_logits = nn::softmax_channels_backward(r.final_mask.values, d_final_mask.values);
  Matrix<Scalar> dx = nn::affine_backward(params_, to_rgb_, trace.render_out.values, d_rgb);
  dx += nn::affine_backward(params_, to_seg_, trace.render_out.values, d_logits);

  FeatureMap<Scalar> d_depth_up(d_logits, r.final_mask.height, r.final_mask.width);
  for (int s = 0; s < config_.upsampling_stages(); ++s) d_depth_up = nn::upsample2x_backward(d_depth_up);

  // Renderer.
  FeatureMap<Scalar> grad(std::move(dx), trace.render_out.height, trace.render_out.width);
  for (std::size_t i = render_convs_.size(); i-- > 0;) {
    const auto& conv = render_convs_[i];
    nn::leaky_relu_backward(trace.render_pre[i].values, grad.values);
    Matrix<Scalar> d_weight = Matrix<Scalar>::Zero(conv.out, conv.in * conv.kernel * conv.kernel);
    FeatureMap<Scalar> d_in =
        nn::conv_backward(render_weight(i), conv, trace.render_inputs[i], grad, &d_weight, &params_[conv.bias].grad);
    params_.grad_matrix(conv.weight) += d_weight * static_cast<Scalar>(conv.scale());
    grad = i > 0 ? nn::upsample2x_backward(d_in) : std::move(d_in);
  }
  const Matrix<Scalar>& d_fused = grad.values;

  // Composition: f = sum_c m_c * f_c, m = softmax(d).
  Matrix<Scalar> d_mask(classes, res * res);
  std::vector<Matrix<Scalar>> d_features(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    d_mask.row(c) = d_fused.cwiseProduct(r.features[cs]).colwise().sum();
    d_features[cs] = d_fused * r.mask.row(c).asDiagonal();
  }
  const Matrix<Scalar> d_depth = nn::softmax_channels_backward(r.mask, d_mask) + d_depth_up.values;

  // Local generators.
  StyleBank<Scalar> d_styles(classes, config_.style_dim);
  d_styles.assignment = trace.styles.assignment;
  for (int c = 0; c < classes; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    const auto& lt = trace.local[cs];
    Matrix<Scalar> d_act = nn::affine_backward(params_, feature_heads_[cs], lt.activations[layers], d_features[cs]);
    for (int l = layers - 1; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      if (l == kLastDepthLayer)
        d_act += nn::affine_backward(params_, depth_heads_[cs], lt.activations[li + 1], d_depth.row(c));
      nn::leaky_relu_backward(lt.pre[li], d_act);
      const auto& layer = local_[static_cast<std::size_t>(c * layers + l)];
      auto g = nn::modulated_backward(params_, layer, trace.styles.at(c, l), lt.activations[li], lt.caches[li], d_act);
      d_styles.at(c, l) = std::move(g.style);
      d_act = std::move(g.input);
    }
  }
  if (trace.triples.empty()) return d_styles;

  // Style heads into the factorized latents.
  std::vector<std::array<Vector<Scalar>, 3>> d_w(trace.triples.size());
  for (auto& dw : d_w)
    for (auto& v : dw) v = Vector<Scalar>::Zero(config_.latent_dim);
  for (int c = 0; c < classes; ++c) {
    const auto t = static_cast<std::size_t>(trace.styles.assignment[static_cast<std::size_t>(c)]);
    for (int l = 0; l < layers; ++l) {
      const auto idx = static_cast<std::size_t>(c * layers + l);
      Vector<Scalar> d_pre = d_styles.at(c, l);
      nn::leaky_relu_backward(trace.style_pre[idx], d_pre);
      const auto g = layer_group(l);
      const auto& w = trace.triples[t].component(g);
      Eigen::Map<const Matrix<Scalar>> w_col(w.data(), w.size(), 1);
      Eigen::Map<const Matrix<Scalar>> d_col(d_pre.data(), d_pre.size(), 1);
      d_w[t][static_cast<std::size_t>(g)] += nn::affine_backward(params_, style_heads_[idx], w_col, d_col).col(0);
    }
  }

  // Mapping network (only for traces that started from z).
  for (std::size_t t = 0; t < trace.mapping.size(); ++t) {
    const auto& mt = trace.mapping[t];
    const auto& trunk_out = mt.inputs.back();
    Eigen::Map<const Matrix<Scalar>> x_col(trunk_out.data(), trunk_out.size(), 1);
    Vector<Scalar> d_x = Vector<Scalar>::Zero(config_.latent_dim);
    for (std::size_t g = 0; g < 3; ++g) {
      Eigen::Map<const Matrix<Scalar>> d_col(d_w[t][g].data(), d_w[t][g].size(), 1);
      d_x += nn::affine_backward(params_, mapping_heads_[g], x_col, d_col).col(0);
    }
    for (std::size_t i = mapping_.size(); i-- > 0;) {
      nn::leaky_relu_backward(mt.pre[i], d_x);
      Eigen::Map<const Matrix<Scalar>> in_col(mt.inputs[i].data(), mt.inputs[i].size(), 1);
      Eigen::Map<const Matrix<Scalar>> d_col(d_x.data(), d_x.size(), 1);
      d_x = nn::affine_backward(params_, mapping_[i], in_col, d_col).col(0);
    }
  }
  return d_styles;
}

template class Generator<float>;
template class Generator<double>;

}  // namespace scenegan
