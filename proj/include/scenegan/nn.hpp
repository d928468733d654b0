#pragma once

// Layer primitives with explicit forward/backward passes. Weights use the
// equalized learning-rate convention: stored ~N(0, 1/lr_mul) and scaled at
// runtime by lr_mul / sqrt(fan_in).

#include "scenegan/random.hpp"
#include "scenegan/tensor.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace scenegan::nn {

inline constexpr double kLeakySlope = 0.2;
inline const double kLeakyGain = std::sqrt(2.0);

template <typename Scalar>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  Vector<Scalar> value;
  Vector<Scalar> grad;

  int rows() const { return shape.empty() ? 1 : shape.front(); }
  int cols() const { return static_cast<int>(value.size()) / std::max(rows(), 1); }
};

template <typename Scalar>
class ParameterSet {
 public:
  std::size_t add(std::string name, std::vector<int> shape, Vector<Scalar> init) {
    Parameter<Scalar> p{std::move(name), std::move(shape), std::move(init), {}};
    p.grad = Vector<Scalar>::Zero(p.value.size());
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  Parameter<Scalar>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<Scalar>& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i].name == name) return i;
    return std::nullopt;
  }

  Eigen::Map<const Matrix<Scalar>> matrix(std::size_t i) const {
    const auto& p = params_[i];
    return {p.value.data(), p.rows(), p.cols()};
  }
  Eigen::Map<Matrix<Scalar>> grad_matrix(std::size_t i) {
    auto& p = params_[i];
    return {p.grad.data(), p.rows(), p.cols()};
  }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

 private:
  std::vector<Parameter<Scalar>> params_;
};

template <typename Scalar>
Vector<Scalar> normal_vector(Rng& rng, int n, double stddev) {
  Vector<Scalar> v(n);
  for (int i = 0; i < n; ++i) v[i] = static_cast<Scalar>(rng.normal() * stddev);
  return v;
}

// ---------------------------------------------------------------------------
// Activations

template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return (x.array().max(S(kLeakySlope) * x.array()) * S(kLeakyGain)).matrix();
}

/// Multiplies `grad` in place by the derivative of the leaky relu evaluated at `pre`.
template <typename D1, typename D2>
void leaky_relu_backward(const Eigen::MatrixBase<D1>& pre, Eigen::MatrixBase<D2>& grad) {
  using S = typename D1::Scalar;
  const S lo = S(kLeakyGain * kLeakySlope), hi = S(kLeakyGain);
  grad.array() *= (pre.array() > S(0)).template cast<S>() * (hi - lo) + lo;
}

/// Column-wise softmax over channels, stabilized by subtracting the per-column max.
template <typename Scalar>
Matrix<Scalar> softmax_channels(const Matrix<Scalar>& logits) {
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar peak = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - peak).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> softmax_channels_backward(const Matrix<Scalar>& probs, const Matrix<Scalar>& grad) {
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> inner = probs.cwiseProduct(grad).colwise().sum();
  return probs.cwiseProduct(grad - inner.replicate(grad.rows(), 1));
}

// ---------------------------------------------------------------------------
// Affine: fully connected / pointwise (1x1) layer, y = scale * W x + lr_mul * b.

struct Affine {
  std::size_t weight = 0;
  std::size_t bias = 0;
  int in = 0;
  int out = 0;
  double lr_mul = 1.0;

  double scale() const { return lr_mul / std::sqrt(static_cast<double>(in)); }
};

template <typename Scalar>
Affine make_affine(ParameterSet<Scalar>& params, const std::string& name, int in, int out, Rng& rng,
                   double lr_mul = 1.0, double bias_init = 0.0, double weight_std = 1.0) {
  Affine layer;
  layer.in = in;
  layer.out = out;
  layer.lr_mul = lr_mul;
  Vector<Scalar> w = weight_std == 0.0 ? Vector<Scalar>::Zero(out * in) : normal_vector<Scalar>(rng, out * in, weight_std / lr_mul);
  layer.weight = params.add(name + ".weight", {out, in}, std::move(w));
  layer.bias = params.add(name + ".bias", {out}, Vector<Scalar>::Constant(out, static_cast<Scalar>(bias_init / lr_mul)));
  return layer;
}

/// x: in x cols. Returns the pre-activation out x cols.
template <typename Scalar, typename Derived>
Matrix<Scalar> affine_forward(const ParameterSet<Scalar>& params, const Affine& layer, const Eigen::MatrixBase<Derived>& x) {
  const auto w = params.matrix(layer.weight);
  const auto& b = params[layer.bias].value;
  Matrix<Scalar> y = (w * x) * static_cast<Scalar>(layer.scale());
  y.colwise() += b * static_cast<Scalar>(layer.lr_mul);
  return y;
}

/// Accumulates parameter gradients and returns dL/dx.
template <typename Scalar, typename D1, typename D2>
Matrix<Scalar> affine_backward(ParameterSet<Scalar>& params, const Affine& layer, const Eigen::MatrixBase<D1>& x,
                               const Eigen::MatrixBase<D2>& grad) {
  const auto scale = static_cast<Scalar>(layer.scale());
  params.grad_matrix(layer.weight).noalias() += (grad * x.transpose()) * scale;
  params[layer.bias].grad += grad.rowwise().sum() * static_cast<Scalar>(layer.lr_mul);
  return (params.matrix(layer.weight).transpose() * grad) * scale;
}

// ---------------------------------------------------------------------------
// Style-modulated pointwise convolution with weight demodulation.

struct Modulated {
  Affine style;  // style_dim -> in, bias initialized to 1
  std::size_t weight = 0;
  std::size_t bias = 0;
  int in = 0;
  int out = 0;
  bool demodulate = true;
};

template <typename Scalar>
struct ModulatedCache {
  Vector<Scalar> modulation;  // per input channel
  Matrix<Scalar> scaled;      // weight * gain * modulation (before demodulation)
  Vector<Scalar> demod;       // per output channel
  Matrix<Scalar> weight;      // final per-sample weight
};

template <typename Scalar>
Modulated make_modulated(ParameterSet<Scalar>& params, const std::string& name, int style_dim, int in, int out, Rng& rng,
                         bool demodulate = true) {
  Modulated layer;
  layer.style = make_affine(params, name + ".style", style_dim, in, rng, 1.0, 1.0);
  layer.in = in;
  layer.out = out;
  layer.demodulate = demodulate;
  layer.weight = params.add(name + ".weight", {out, in}, normal_vector<Scalar>(rng, out * in, 1.0));
  layer.bias = params.add(name + ".bias", {out}, Vector<Scalar>::Zero(out));
  return layer;
}

/// x: in x pixels; style: style_dim. Returns the pre-activation out x pixels.
template <typename Scalar>
Matrix<Scalar> modulated_forward(const ParameterSet<Scalar>& params, const Modulated& layer, const Vector<Scalar>& style,
                                 const Matrix<Scalar>& x, ModulatedCache<Scalar>& cache) {
  cache.modulation = affine_forward(params, layer.style, style).col(0);
  const auto gain = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(layer.in)));
  cache.scaled = params.matrix(layer.weight) * gain;
  cache.scaled.array().rowwise() *= cache.modulation.transpose().array();
  if (layer.demodulate) {
    cache.demod = (cache.scaled.rowwise().squaredNorm().array() + Scalar(1e-8)).rsqrt().matrix();
    cache.weight = cache.demod.asDiagonal() * cache.scaled;
  } else {
    cache.demod = Vector<Scalar>::Ones(layer.out);
    cache.weight = cache.scaled;
  }
  Matrix<Scalar> y = cache.weight * x;
  y.colwise() += params[layer.bias].value;
  return y;
}

template <typename Scalar>
struct ModulatedGrad {
  Matrix<Scalar> input;
  Vector<Scalar> style;
};

template <typename Scalar>
ModulatedGrad<Scalar> modulated_backward(ParameterSet<Scalar>& params, const Modulated& layer, const Vector<Scalar>& style,
                                         const Matrix<Scalar>& x, const ModulatedCache<Scalar>& cache,
                                         const Matrix<Scalar>& grad) {
  ModulatedGrad<Scalar> out;
  params[layer.bias].grad += grad.rowwise().sum();
  const Matrix<Scalar> d_weight = grad * x.transpose();
  out.input = cache.weight.transpose() * grad;

  Matrix<Scalar> d_scaled;
  if (layer.demodulate) {
    const Vector<Scalar> coupling =
        d_weight.cwiseProduct(cache.scaled).rowwise().sum().cwiseProduct(cache.demod.array().cube().matrix());
    d_scaled = cache.demod.asDiagonal() * d_weight;
    d_scaled.noalias() -= coupling.asDiagonal() * cache.scaled;
  } else {
    d_scaled = d_weight;
  }
  const auto gain = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(layer.in)));
  const auto w = params.matrix(layer.weight);
  Matrix<Scalar> dw = d_scaled * gain;
  dw.array().rowwise() *= cache.modulation.transpose().array();
  params.grad_matrix(layer.weight) += dw;
  const Vector<Scalar> d_mod = (w.cwiseProduct(d_scaled)).colwise().sum().transpose() * gain;

  Eigen::Map<const Matrix<Scalar>> style_col(style.data(), style.size(), 1);
  Eigen::Map<const Matrix<Scalar>> dmod_col(d_mod.data(), d_mod.size(), 1);
  out.style = affine_backward(params, layer.style, style_col, dmod_col).col(0);
  return out;
}

// ---------------------------------------------------------------------------
// Spatial convolution via im2col. Padding is kernel / 2 ("same" for stride 1).

struct Conv {
  std::size_t weight = 0;
  std::size_t bias = 0;
  int in = 0;
  int out = 0;
  int kernel = 3;
  int stride = 1;

  double scale() const { return 1.0 / std::sqrt(static_cast<double>(in * kernel * kernel)); }
  int output_size(int size) const { return (size + 2 * (kernel / 2) - kernel) / stride + 1; }
};

template <typename Scalar>
Conv make_conv(ParameterSet<Scalar>& params, const std::string& name, int in, int out, int kernel, int stride, Rng& rng,
               double weight_std = 1.0) {
  Conv layer;
  layer.in = in;
  layer.out = out;
  layer.kernel = kernel;
  layer.stride = stride;
  const int fan = in * kernel * kernel;
  Vector<Scalar> w = weight_std == 0.0 ? Vector<Scalar>::Zero(out * fan) : normal_vector<Scalar>(rng, out * fan, weight_std);
  layer.weight = params.add(name + ".weight", {out, in, kernel, kernel}, std::move(w));
  layer.bias = params.add(name + ".bias", {out}, Vector<Scalar>::Zero(out));
  return layer;
}

template <typename Scalar>
Matrix<Scalar> im2col(const FeatureMap<Scalar>& x, int kernel, int stride) {
  const int pad = kernel / 2;
  const int oh = (x.height + 2 * pad - kernel) / stride + 1;
  const int ow = (x.width + 2 * pad - kernel) / stride + 1;
  Matrix<Scalar> cols = Matrix<Scalar>::Zero(x.channels() * kernel * kernel, oh * ow);
  for (int c = 0; c < x.channels(); ++c) {
    const Scalar* plane = x.values.row(c).data();
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        Scalar* dst = cols.row((c * kernel + ky) * kernel + kx).data();
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= x.height) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < x.width) dst[oy * ow + ox] = plane[iy * x.width + ix];
          }
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
FeatureMap<Scalar> col2im(const Matrix<Scalar>& cols, int channels, int height, int width, int kernel, int stride) {
  const int pad = kernel / 2;
  const int oh = (height + 2 * pad - kernel) / stride + 1;
  const int ow = (width + 2 * pad - kernel) / stride + 1;
  FeatureMap<Scalar> x(channels, height, width);
  for (int c = 0; c < channels; ++c) {
    Scalar* plane = x.values.row(c).data();
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const Scalar* src = cols.row((c * kernel + ky) * kernel + kx).data();
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= height) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < width) plane[iy * width + ix] += src[oy * ow + ox];
          }
        }
      }
    }
  }
  return x;
}

/// `weight` is the effective out x (in*k*k) matrix (already scaled or spectrally normalized).
template <typename Scalar>
FeatureMap<Scalar> conv_forward(const Matrix<Scalar>& weight, const Vector<Scalar>& bias, const Conv& layer,
                                const FeatureMap<Scalar>& x) {
  require(x.channels() == layer.in, "conv: input channel mismatch");
  const int oh = layer.output_size(x.height);
  const int ow = layer.output_size(x.width);
  FeatureMap<Scalar> y;
  y.height = oh;
  y.width = ow;
  if (layer.kernel == 1 && layer.stride == 1) {
    y.values.noalias() = weight * x.values;
  } else {
    y.values.noalias() = weight * im2col(x, layer.kernel, layer.stride);
  }
  y.values.colwise() += bias;
  return y;
}

/// Returns dL/dx and accumulates dL/d(effective weight) into `weight_grad` and dL/dbias into `bias_grad`.
template <typename Scalar>
FeatureMap<Scalar> conv_backward(const Matrix<Scalar>& weight, const Conv& layer, const FeatureMap<Scalar>& x,
                                 const FeatureMap<Scalar>& grad, Matrix<Scalar>* weight_grad, Vector<Scalar>* bias_grad,
                                 bool need_input_grad = true) {
  if (bias_grad) *bias_grad += grad.values.rowwise().sum();
  if (layer.kernel == 1 && layer.stride == 1) {
    if (weight_grad) weight_grad->noalias() += grad.values * x.values.transpose();
    if (!need_input_grad) return {};
    return FeatureMap<Scalar>(weight.transpose() * grad.values, x.height, x.width);
  }
  if (weight_grad) {
    const Matrix<Scalar> cols = im2col(x, layer.kernel, layer.stride);
    weight_grad->noalias() += grad.values * cols.transpose();
  }
  if (!need_input_grad) return {};
  const Matrix<Scalar> dcols = weight.transpose() * grad.values;
  return col2im(dcols, layer.in, x.height, x.width, layer.kernel, layer.stride);
}

// ---------------------------------------------------------------------------
// Bilinear x2 upsampling (half-pixel centers, edge clamped) and its adjoint.

namespace detail {
template <typename Scalar>
void upsample_line(const Scalar* src, int n, int stride_src, Scalar* dst, int stride_dst) {
  for (int i = 0; i < n; ++i) {
    const Scalar c = src[i * stride_src];
    const Scalar l = src[std::max(i - 1, 0) * stride_src];
    const Scalar r = src[std::min(i + 1, n - 1) * stride_src];
    dst[(2 * i) * stride_dst] = Scalar(0.75) * c + Scalar(0.25) * l;
    dst[(2 * i + 1) * stride_dst] = Scalar(0.75) * c + Scalar(0.25) * r;
  }
}

template <typename Scalar>
void upsample_line_adjoint(const Scalar* grad, int n, int stride_grad, Scalar* dst, int stride_dst) {
  for (int i = 0; i < n; ++i) {
    const Scalar a = grad[(2 * i) * stride_grad];
    const Scalar b = grad[(2 * i + 1) * stride_grad];
    dst[i * stride_dst] += Scalar(0.75) * (a + b);
    dst[std::max(i - 1, 0) * stride_dst] += Scalar(0.25) * a;
    dst[std::min(i + 1, n - 1) * stride_dst] += Scalar(0.25) * b;
  }
}
}  // namespace detail

template <typename Scalar>
FeatureMap<Scalar> upsample2x(const FeatureMap<Scalar>& x) {
  const int h = x.height, w = x.width;
  FeatureMap<Scalar> y(x.channels(), 2 * h, 2 * w);
  std::vector<Scalar> rows(static_cast<std::size_t>(h) * 2 * w);
  for (int c = 0; c < x.channels(); ++c) {
    const Scalar* src = x.values.row(c).data();
    Scalar* dst = y.values.row(c).data();
    for (int r = 0; r < h; ++r) detail::upsample_line(src + r * w, w, 1, rows.data() + r * 2 * w, 1);
    for (int col = 0; col < 2 * w; ++col) detail::upsample_line(rows.data() + col, h, 2 * w, dst + col, 2 * w);
  }
  return y;
}

/// Adjoint of upsample2x: maps a gradient at (2h, 2w) back to (h, w).
template <typename Scalar>
FeatureMap<Scalar> upsample2x_backward(const FeatureMap<Scalar>& grad) {
  const int h = grad.height / 2, w = grad.width / 2;
  FeatureMap<Scalar> x(grad.channels(), h, w);
  std::vector<Scalar> rows(static_cast<std::size_t>(h) * 2 * w);
  for (int c = 0; c < grad.channels(); ++c) {
    std::fill(rows.begin(), rows.end(), Scalar(0));
    const Scalar* src = grad.values.row(c).data();
    Scalar* dst = x.values.row(c).data();
    for (int col = 0; col < 2 * w; ++col) detail::upsample_line_adjoint(src + col, h, 2 * w, rows.data() + col, 2 * w);
    for (int r = 0; r < h; ++r) detail::upsample_line_adjoint(rows.data() + r * 2 * w, w, 1, dst + r * w, 1);
  }
  return x;
}

}  // namespace scenegan::nn
