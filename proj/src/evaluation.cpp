#include "scenegan/evaluation.hpp"

#include "scenegan/nn.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace scenegan {

FeatureStats feature_stats(const Matrix<double>& samples) {
  const auto n = samples.rows();
  require(n >= samples.cols() + 1,
          "feature_stats: need at least dim+1 samples (" + std::to_string(samples.cols() + 1) + "), got " + std::to_string(n));
  FeatureStats s;
  s.count = n;
  s.mean = samples.colwise().mean().transpose();
  const Matrix<double> centered = samples.rowwise() - s.mean.transpose();
  s.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return s;
}

namespace {

void check_symmetric(const Matrix<double>& m, const char* which) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
          std::string("frechet_distance: covariance ") + which + " is not symmetric");
}

Vector<double> clamped_eigenvalues(const Matrix<double>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<double>> solver(m, Eigen::EigenvaluesOnly);
  Vector<double> ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    require(ev[i] > -1e-6, "frechet_distance: matrix has a negative eigenvalue " + std::to_string(ev[i]));
    ev[i] = std::max(ev[i], 0.0);
  }
  return ev;
}

}  // namespace

double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
  require(a.dim() == b.dim(), "frechet_distance: dimension mismatch");
  require(a.covariance.rows() == a.dim() && b.covariance.rows() == b.dim(), "frechet_distance: covariance shape mismatch");
  check_symmetric(a.covariance, "a");
  check_symmetric(b.covariance, "b");

  Eigen::SelfAdjointEigenSolver<Matrix<double>> sa(a.covariance);
  Vector<double> roots = sa.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    require(roots[i] > -1e-6, "frechet_distance: covariance a is not positive semi-definite");
    roots[i] = std::sqrt(std::max(roots[i], 0.0));
  }
  const Matrix<double> sqrt_a = sa.eigenvectors() * roots.asDiagonal() * sa.eigenvectors().transpose();
  Matrix<double> inner = sqrt_a * b.covariance * sqrt_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const double tr_sqrt = clamped_eigenvalues(inner).cwiseSqrt().sum();

  const double d = (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * tr_sqrt;
  return std::max(d, 0.0);
}

Vector<double> PixelFlattenExtractor::extract(const Image& image) const {
  require(image.values.size() == dim_, "pixel-flatten extractor: image size mismatch");
  Vector<double> out(dim_);
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, 1>> flat(image.values.data(), dim_);
  out = flat.cast<double>();
  return out;
}

namespace {
double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }
}  // namespace

ProxyExtractor::ProxyExtractor(std::uint64_t seed, std::vector<int> widths) {
  std::mt19937_64 engine(seed);
  int in = 3;
  for (int out : widths) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    const double bound = std::sqrt(3.0 / (in * 9));
    layer.weight.resize(out, in * 9);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = (2.0 * unit_from_bits(engine()) - 1.0) * bound;
    layer.bias.resize(out);
    for (int i = 0; i < out; ++i) layer.bias[i] = (2.0 * unit_from_bits(engine()) - 1.0) * 0.1;
    dim_ += 2 * out;
    layers_.push_back(std::move(layer));
    in = out;
  }
}

Vector<double> ProxyExtractor::extract(const Image& image) const {
  require(image.channels() == 3, "proxy extractor: expected an RGB image");
  FeatureMap<double> x = image.cast<double>();
  Vector<double> out(dim_);
  Eigen::Index offset = 0;
  for (const auto& layer : layers_) {
    nn::Conv conv;
    conv.in = layer.in;
    conv.out = layer.out;
    conv.kernel = 3;
    conv.stride = 2;
    FeatureMap<double> pre = nn::conv_forward(layer.weight, layer.bias, conv, x);
    x = FeatureMap<double>(nn::leaky_relu(pre.values), pre.height, pre.width);
    const Vector<double> mean = x.values.rowwise().mean();
    const Vector<double> sq = x.values.array().square().rowwise().mean();
    out.segment(offset, layer.out) = mean;
    out.segment(offset + layer.out, layer.out) = (sq - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
    offset += 2 * layer.out;
  }
  return out;
}

FeatureStats feature_stats(const std::vector<Image>& images, const FeatureExtractor& extractor) {
  Matrix<double> samples(static_cast<Eigen::Index>(images.size()), extractor.dim());
  for (std::size_t i = 0; i < images.size(); ++i) samples.row(static_cast<Eigen::Index>(i)) = extractor.extract(images[i]).transpose();
  return feature_stats(samples);
}

namespace {
void accumulate_iou(const LabelMap& pred, const LabelMap& gt, int num_classes, std::vector<std::int64_t>& inter,
                    std::vector<std::int64_t>& uni) {
  require(pred.height() == gt.height() && pred.width() == gt.width(), "miou: prediction and reference shapes differ");
  for (Eigen::Index i = 0; i < gt.values.size(); ++i) {
    const int p = pred.values.data()[i];
    const int g = gt.values.data()[i];
    require(p >= 0 && p < num_classes && g >= 0 && g < num_classes, "miou: label value outside [0, C)");
    if (p == g) {
      ++inter[static_cast<std::size_t>(p)];
      ++uni[static_cast<std::size_t>(p)];
    } else {
      ++uni[static_cast<std::size_t>(p)];
      ++uni[static_cast<std::size_t>(g)];
    }
  }
}

double mean_iou(const std::vector<std::int64_t>& inter, const std::vector<std::int64_t>& uni) {
  double total = 0;
  int present = 0;
  for (std::size_t c = 0; c < uni.size(); ++c) {
    if (uni[c] == 0) continue;
    total += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    ++present;
  }
  return present == 0 ? 1.0 : total / present;
}
}  // namespace

double miou(const LabelMap& pred, const LabelMap& gt, int num_classes) {
  std::vector<std::int64_t> inter(static_cast<std::size_t>(num_classes)), uni(static_cast<std::size_t>(num_classes));
  accumulate_iou(pred, gt, num_classes, inter, uni);
  return mean_iou(inter, uni);
}

double miou(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt, int num_classes) {
  require(pred.size() == gt.size(), "miou: prediction and reference counts differ");
  std::vector<std::int64_t> inter(static_cast<std::size_t>(num_classes)), uni(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < pred.size(); ++i) accumulate_iou(pred[i], gt[i], num_classes, inter, uni);
  return mean_iou(inter, uni);
}

namespace {
constexpr int kSegFeatures = 4;

// RGB plus the normalized row, which carries most of a street layout
Eigen::Matrix<double, kSegFeatures, 1> pixel_features(const Image& image, int p) {
  Eigen::Matrix<double, kSegFeatures, 1> f;
  for (int k = 0; k < 3; ++k) f[k] = image.values(k, p);
  f[3] = image.height > 1 ? 2.0 * (p / image.width) / (image.height - 1) - 1.0 : 0.0;
  return f;
}
}  // namespace

ColorSegmenter ColorSegmenter::fit(const Dataset& data, int num_classes) {
  require(!data.empty(), "color segmenter: no training data");
  Matrix<double> sum = Matrix<double>::Zero(num_classes, kSegFeatures), sq = Matrix<double>::Zero(num_classes, kSegFeatures);
  Vector<double> count = Vector<double>::Zero(num_classes);
  for (const auto& sample : data) {
    require(sample.labels.num_classes <= num_classes, "color segmenter: label map has more classes than requested");
    for (int p = 0; p < sample.image.pixels(); ++p) {
      const int c = sample.labels.values.data()[p];
      const auto f = pixel_features(sample.image, p);
      sum.row(c) += f.transpose();
      sq.row(c) += f.cwiseProduct(f).transpose();
      count[c] += 1;
    }
  }
  ColorSegmenter seg;
  seg.mean_ = Matrix<double>::Zero(num_classes, kSegFeatures);
  seg.variance_ = Matrix<double>::Constant(num_classes, kSegFeatures, 1.0);
  seg.log_prior_ = Vector<double>::Constant(num_classes, -1e30);
  const double total = count.sum();
  for (int c = 0; c < num_classes; ++c) {
    if (count[c] == 0) continue;
    seg.mean_.row(c) = sum.row(c) / count[c];
    seg.variance_.row(c) = (sq.row(c) / count[c] - seg.mean_.row(c).cwiseProduct(seg.mean_.row(c))).cwiseMax(1e-4);
    seg.log_prior_[c] = std::log(count[c] / total);
  }
  return seg;
}

LabelMap ColorSegmenter::segment(const Image& image) const {
  require(image.channels() == 3, "color segmenter: expected an RGB image");
  LabelMap out(image.height, image.width, num_classes());
  const Vector<double> log_norm = -0.5 * variance_.array().log().rowwise().sum().matrix();
  for (int p = 0; p < image.pixels(); ++p) {
    const auto f = pixel_features(image, p);
    double best = -std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < num_classes(); ++c) {
      double ll = log_prior_[c] + log_norm[c];
      for (int k = 0; k < kSegFeatures; ++k) {
        const double d = f[k] - mean_(c, k);
        ll -= 0.5 * d * d / variance_(c, k);
      }
      if (ll > best) best = ll, arg = c;
    }
    out.values.data()[p] = arg;
  }
  return out;
}

namespace {
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "spearman: need two equally long series of length >= 2");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace scenegan
