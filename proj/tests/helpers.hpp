#pragma once

#include "scenegan/discriminator.hpp"
#include "scenegan/generator.hpp"
#include "scenegan/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

namespace scenegan::testing {

inline GeneratorConfig tiny_generator(int classes = 3) {
  GeneratorConfig g;
  g.num_classes = classes;
  g.latent_dim = 8;
  g.style_dim = 8;
  g.coarse_resolution = 4;
  g.output_resolution = 16;
  g.fourier_features = 8;
  g.local_channels = 6;
  g.feature_channels = 5;
  g.render_channels = {6, 5, 4};
  g.mapping_layers = 2;
  return g;
}

inline DiscriminatorConfig tiny_discriminator(int classes = 3, bool sn = true) {
  DiscriminatorConfig d;
  d.resolution = 16;
  d.mask_channels = classes;
  d.channels = {4, 6, 8};
  d.fusion_stage = 1;
  d.spectral_norm = sn;
  return d;
}

/// Adds small noise to every parameter so zero-initialized heads carry gradient.
template <typename Scalar>
void jitter(nn::ParameterSet<Scalar>& params, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  for (auto& p : params)
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value[i] += static_cast<Scalar>(scale * rng.normal());
}

template <typename Scalar>
FeatureMap<Scalar> random_map(Rng& rng, int channels, int h, int w, double scale = 1.0) {
  FeatureMap<Scalar> m(channels, h, w);
  for (Eigen::Index i = 0; i < m.values.size(); ++i) m.values.data()[i] = static_cast<Scalar>(scale * rng.normal());
  return m;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scenegan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

using LongMatrix = std::vector<std::vector<long double>>;

struct LongEigen {
  std::vector<long double> values;      // descending
  std::vector<std::vector<long double>> vectors;  // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi rotations in extended precision on a symmetric matrix.
inline LongEigen jacobi_eigen(LongMatrix a) {
  const int d = static_cast<int>(a.size());
  LongMatrix v(d, std::vector<long double>(d, 0.0L));
  for (int p = 0; p < d; ++p) v[p][p] = 1.0L;
  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-60L) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        if (std::fabs(a[p][q]) < 1e-40L) continue;
        const long double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const long double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const long double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < d; ++k) {
          const long double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const long double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          const long double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  LongEigen out;
  for (int i : order) {
    out.values.push_back(a[i][i]);
    std::vector<long double> col(d);
    for (int k = 0; k < d; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

inline LongMatrix to_long(const Matrix<double>& m) {
  LongMatrix out(m.rows(), std::vector<long double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

}  // namespace scenegan::testing
