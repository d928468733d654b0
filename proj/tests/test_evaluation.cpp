#include "helpers.hpp"

#include "scenegan/evaluation.hpp"
#include "scenegan/toy_scenes.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace scenegan;
using scenegan::testing::jacobi_eigen;
using scenegan::testing::LongMatrix;
using scenegan::testing::to_long;

namespace {

FeatureStats make_stats(Vector<double> mean, Matrix<double> cov) {
  FeatureStats s;
  s.mean = std::move(mean);
  s.covariance = std::move(cov);
  s.count = 1000;
  return s;
}

Matrix<double> random_spd(int d, Rng& rng) {
  Matrix<double> a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a * a.transpose() + 0.1 * Matrix<double>::Identity(d, d);
}

LongMatrix multiply(const LongMatrix& a, const LongMatrix& b) {
  const std::size_t n = a.size();
  LongMatrix c(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

LongMatrix sqrt_spd(const LongMatrix& a) {
  const auto eig = jacobi_eigen(a);
  const std::size_t n = a.size();
  LongMatrix out(n, std::vector<long double>(n, 0.0L));
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i][j] += std::sqrt(std::max(eig.values[e], 0.0L)) * eig.vectors[e][i] * eig.vectors[e][j];
  return out;
}

// Tr(A + B - 2 sqrt(sqrt(A) B sqrt(A))) + |mu_a - mu_b|^2 in extended precision.
long double frechet_oracle(const FeatureStats& a, const FeatureStats& b) {
  const auto sa = sqrt_spd(to_long(a.covariance));
  const auto inner = multiply(multiply(sa, to_long(b.covariance)), sa);
  const auto root = sqrt_spd(inner);
  long double d = 0;
  for (int i = 0; i < a.dim(); ++i) {
    const long double diff = static_cast<long double>(a.mean[i]) - b.mean[i];
    d += diff * diff + a.covariance(i, i) + b.covariance(i, i) - 2 * root[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  }
  return d;
}

LabelMap random_labels(int h, int w, int classes, std::uint64_t seed) {
  Rng rng(seed);
  LabelMap m(h, w, classes);
  for (Eigen::Index i = 0; i < m.values.size(); ++i)
    m.values.data()[i] = std::uniform_int_distribution<std::int32_t>(0, classes - 1)(rng.engine());
  return m;
}

}  // namespace

TEST_CASE("frechet distance: identity, analytic and oracle cases") {
  Rng rng(1);
  const auto cov = random_spd(5, rng);
  const auto a = make_stats(Vector<double>::Constant(5, 0.3), cov);
  CHECK(std::abs(frechet_distance(a, a)) < 1e-6);

  Matrix<double> one(1, 1);
  one << 1.0;
  CHECK(std::abs(frechet_distance(make_stats(Vector<double>::Zero(1), one), make_stats(Vector<double>::Ones(1), one)) - 1.0) <
        1e-9);
  Matrix<double> four(1, 1);
  four << 4.0;
  // (sigma_a - sigma_b)^2 = 1
  CHECK(std::abs(frechet_distance(make_stats(Vector<double>::Zero(1), one), make_stats(Vector<double>::Zero(1), four)) - 1.0) <
        1e-9);

  for (int trial = 0; trial < 10; ++trial) {
    const auto x = make_stats(nn::normal_vector<double>(rng, 4, 1.0), random_spd(4, rng));
    const auto y = make_stats(nn::normal_vector<double>(rng, 4, 1.0), random_spd(4, rng));
    const double d = frechet_distance(x, y);
    CHECK(std::abs(d - static_cast<double>(frechet_oracle(x, y))) < 1e-5);
    CHECK(std::abs(d - frechet_distance(y, x)) < 1e-8);
    CHECK(d >= 0);
  }

  Matrix<double> skew = cov;
  skew(0, 1) += 1e-3;
  CHECK_THROWS_AS(frechet_distance(make_stats(Vector<double>::Zero(5), skew), a), std::invalid_argument);
  CHECK_THROWS_AS(frechet_distance(make_stats(Vector<double>::Zero(1), one), a), std::invalid_argument);

  SUBCASE("rank-deficient covariances stay finite and nonnegative") {
    Matrix<double> low = Matrix<double>::Zero(3, 3);
    low(0, 0) = 1.0;
    const double d = frechet_distance(make_stats(Vector<double>::Zero(3), low), make_stats(Vector<double>::Zero(3), low));
    CHECK(d >= 0);
    CHECK(d < 1e-6);
  }
}

TEST_CASE("feature stats: pixel flatten on 2x2 images by hand") {
  std::vector<Image> images;
  const double vals[3][4] = {{0.0, 0.5, -0.5, 1.0}, {0.5, 0.5, 0.0, 0.0}, {-0.5, 0.0, 0.5, -1.0}};
  for (const auto& v : vals) {
    Image img(1, 2, 2);
    for (int p = 0; p < 4; ++p) img.values(0, p) = static_cast<float>(v[p]);
    images.push_back(img);
  }
  PixelFlattenExtractor flat(1, 2, 2);
  CHECK_THROWS_AS(feature_stats(images, flat), std::invalid_argument);  // N = 3 < d + 1 = 5
  images.push_back(images[0]);
  images.push_back(images[1]);
  const auto stats = feature_stats(images, flat);
  CHECK(stats.count == 5);
  // column means and unbiased covariance, by hand over rows {v0, v1, v2, v0, v1}
  const double rows[5][4] = {{0.0, 0.5, -0.5, 1.0}, {0.5, 0.5, 0.0, 0.0}, {-0.5, 0.0, 0.5, -1.0}, {0.0, 0.5, -0.5, 1.0}, {0.5, 0.5, 0.0, 0.0}};
  for (int j = 0; j < 4; ++j) {
    double m = 0;
    for (const auto& r : rows) m += r[j] / 5;
    CHECK(stats.mean[j] == doctest::Approx(m).epsilon(1e-12));
    for (int k = 0; k < 4; ++k) {
      double mk = 0, c = 0;
      for (const auto& r : rows) mk += r[k] / 5;
      for (const auto& r : rows) c += (r[j] - m) * (r[k] - mk) / 4;
      CHECK(stats.covariance(j, k) == doctest::Approx(c).epsilon(1e-6));
    }
  }
  CHECK(std::abs(frechet_distance(stats, stats)) < 1e-6);
}

TEST_CASE("proxy extractor is frozen and seed dependent") {
  ProxyExtractor a, b, other(7);
  CHECK(a.dim() == 2 * (16 + 24 + 32));
  ToySceneSpec spec;
  const auto scene = make_toy_scene(spec, 3);
  const auto fa = a.extract(scene.image);
  CHECK(fa == b.extract(scene.image));
  CHECK(fa != other.extract(scene.image));
  CHECK(fa.allFinite());
  CHECK(a.extract(make_toy_scene(spec, 4).image) != fa);
}

TEST_CASE("proxy FID separates the toy corpus from noise") {
  ToySceneSpec spec;
  spec.resolution = 32;
  const auto corpus = make_toy_corpus(spec, 600, 9);
  std::vector<Image> first, second, noise;
  Rng rng(5);
  for (std::size_t i = 0; i < 300; ++i) first.push_back(corpus[i].image);
  for (std::size_t i = 300; i < 600; ++i) second.push_back(corpus[i].image);
  for (int i = 0; i < 300; ++i) noise.push_back(scenegan::testing::random_map<float>(rng, 3, 32, 32, 0.5));
  ProxyExtractor ex;
  const auto s1 = feature_stats(first, ex), s2 = feature_stats(second, ex), sn = feature_stats(noise, ex);
  const double floor = frechet_distance(s1, s2);
  CHECK(floor > 0);
  CHECK(frechet_distance(s1, sn) > 10 * floor);
}

TEST_CASE("miou: identity, disjoint, counting oracle and permutation invariance") {
  const auto gt = random_labels(8, 8, 4, 1);
  CHECK(miou(gt, gt, 4) == 1.0);
  CHECK(miou(LabelMap(4, 4, 2, 0), LabelMap(4, 4, 2, 1), 2) == 0.0);

  for (std::uint64_t seed = 2; seed < 12; ++seed) {
    const auto p = random_labels(8, 8, 5, seed), g = random_labels(8, 8, 5, seed + 100);
    double sum = 0;
    int present = 0;
    for (int c = 0; c < 5; ++c) {
      std::set<int> pred_set, gt_set;
      for (int i = 0; i < 64; ++i) {
        if (p.values.data()[i] == c) pred_set.insert(i);
        if (g.values.data()[i] == c) gt_set.insert(i);
      }
      std::set<int> uni = pred_set, inter;
      uni.insert(gt_set.begin(), gt_set.end());
      for (int i : pred_set)
        if (gt_set.count(i)) inter.insert(i);
      if (uni.empty()) continue;
      sum += static_cast<double>(inter.size()) / static_cast<double>(uni.size());
      ++present;
    }
    CHECK(miou(p, g, 5) == sum / present);

    const int perm[5] = {3, 0, 4, 1, 2};
    LabelMap pp = p, gp = g;
    for (int i = 0; i < 64; ++i) {
      pp.values.data()[i] = perm[p.values.data()[i]];
      gp.values.data()[i] = perm[g.values.data()[i]];
    }
    CHECK(std::abs(miou(pp, gp, 5) - miou(p, g, 5)) < 1e-12);
  }
  CHECK_THROWS_AS(miou(LabelMap(4, 4, 2), LabelMap(4, 5, 2), 2), std::invalid_argument);
  CHECK(miou(std::vector<LabelMap>{gt, gt}, std::vector<LabelMap>{gt, gt}, 4) == 1.0);
}

TEST_CASE("toy corpus: determinism, empty set and band statistics") {
  ToySceneSpec spec;
  CHECK(make_toy_corpus(spec, 0, 1).empty());
  const auto a = make_toy_corpus(spec, 3, 11), b = make_toy_corpus(spec, 3, 11);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i].image.values == b[i].image.values);
    CHECK((a[i].labels.values == b[i].labels.values).all());
    CHECK(a[i].labels.num_classes == kToyFineClasses);
    CHECK(a[i].image.height == spec.resolution);
  }
  CHECK(toy_class_names().size() == kToyFineClasses);
  CHECK(toy_remap_table().num_super_classes() == kToySuperClasses);

  // super-class 0 is the sky band minus occluders, super-class 1 the road band minus occluders
  const auto corpus = remap_dataset(make_toy_corpus(spec, 1000, 2), toy_remap_table());
  double sky = 0, road = 0;
  const double pixel = 1.0 / spec.resolution;
  for (const auto& s : corpus) {
    const auto f = class_statistics(s.labels);
    CHECK(f[0] <= spec.sky_band.max_fraction + pixel);
    CHECK(f[1] <= spec.road_band.max_fraction + pixel);
    sky += f[0] / 1000;
    road += f[1] / 1000;
  }
  CHECK(sky >= spec.sky_band.min_fraction - 0.1);
  CHECK(road >= spec.road_band.min_fraction - 0.1);
  std::vector<double> coverage(kToySuperClasses, 0.0);
  for (const auto& s : corpus) {
    const auto f = class_statistics(s.labels);
    for (int c = 0; c < kToySuperClasses; ++c) coverage[static_cast<std::size_t>(c)] += f[static_cast<std::size_t>(c)] / 1000;
  }
  for (double c : coverage) CHECK(c >= 0.01);

  ToySceneSpec bad;
  bad.sky_band = {0.5, 0.4};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("color segmenter recovers toy labels from pixels") {
  ToySceneSpec spec;
  spec.resolution = 32;
  const auto data = remap_dataset(make_toy_corpus(spec, 200, 4), toy_remap_table());
  const auto seg = ColorSegmenter::fit(Dataset(data.begin(), data.begin() + 150), kToySuperClasses);
  CHECK(seg.num_classes() == kToySuperClasses);
  std::vector<LabelMap> pred, gt;
  for (std::size_t i = 150; i < 200; ++i) {
    pred.push_back(seg.segment(data[i].image));
    gt.push_back(data[i].labels);
  }
  CHECK(miou(pred, gt, kToySuperClasses) > 0.5);
}

TEST_CASE("spearman rank correlation") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // ties take average ranks: x ranks {1, 2.5, 2.5, 4}
  CHECK(spearman({1, 2, 2, 3}, {1, 2, 3, 4}) == doctest::Approx(0.9486832980505138));
  CHECK_THROWS_AS(spearman({1, 2}, {1}), std::invalid_argument);
}
