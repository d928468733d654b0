#include "helpers.hpp"

#include "scenegan/generator.hpp"

#include <doctest.h>

#include <cmath>

using namespace scenegan;
using scenegan::testing::tiny_generator;

namespace {

template <typename Scalar>
bool same_bits(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && std::memcmp(a.data(), b.data(), sizeof(Scalar) * a.size()) == 0;
}

// Scalar-loop softmax and weighted sum, in long double.
void compose_oracle(const Matrix<double>& depths, const std::vector<Matrix<double>>& features, Matrix<double>& mask,
                    Matrix<double>& fused) {
  const auto classes = depths.rows(), pixels = depths.cols();
  mask.resize(classes, pixels);
  fused = Matrix<double>::Zero(features[0].rows(), pixels);
  for (Eigen::Index p = 0; p < pixels; ++p) {
    long double total = 0;
    for (Eigen::Index c = 0; c < classes; ++c) total += std::exp(static_cast<long double>(depths(c, p)));
    for (Eigen::Index c = 0; c < classes; ++c) mask(c, p) = static_cast<double>(std::exp(static_cast<long double>(depths(c, p))) / total);
    for (Eigen::Index k = 0; k < fused.rows(); ++k) {
      long double acc = 0;
      for (Eigen::Index c = 0; c < classes; ++c) acc += static_cast<long double>(mask(c, p)) * features[static_cast<std::size_t>(c)](k, p);
      fused(k, p) = static_cast<double>(acc);
    }
  }
}

}  // namespace

TEST_CASE("generator config enforces the layer layout and resolution ladder") {
  GeneratorConfig g;
  CHECK(GeneratorConfig::kLayers == 10);
  CHECK(layer_group(0) == LatentGroup::Base);
  CHECK(layer_group(1) == LatentGroup::Base);
  for (int l = 2; l <= 5; ++l) CHECK(layer_group(l) == LatentGroup::Shape);
  for (int l = 6; l <= 9; ++l) CHECK(layer_group(l) == LatentGroup::Texture);
  CHECK_NOTHROW(g.validate());
  g.output_resolution = 48;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.output_resolution = 64;
  g.render_channels = {8, 8};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("map_latent is deterministic, batch-consistent and not collapsed") {
  Generator<double> g(tiny_generator(), 3);
  Rng rng(5);
  const auto z = nn::normal_vector<double>(rng, 8, 1.0);
  const auto a = g.map_latent(z), b = g.map_latent(z);
  CHECK(a.base == b.base);
  CHECK(a.shape == b.shape);
  CHECK(a.texture == b.texture);
  CHECK_THROWS_AS(g.map_latent(Vector<double>::Zero(7)), std::invalid_argument);

  std::vector<Vector<double>> zs;
  for (int i = 0; i < 5; ++i) zs.push_back(nn::normal_vector<double>(rng, 8, 1.0));
  const auto batch = g.map_latent(zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto single = g.map_latent(zs[i]);
    CHECK(batch[i].base == single.base);
    CHECK(batch[i].texture == single.texture);
  }

  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    Vector<double> z1 = nn::normal_vector<double>(rng, 8, 1.0);
    Vector<double> z2 = z1;
    z2[i % 8] += 0.5 + rng.uniform();
    const auto t1 = g.map_latent(z1), t2 = g.map_latent(z2);
    if ((t1.base - t2.base).norm() > 1e-9 && (t1.shape - t2.shape).norm() > 1e-9 && (t1.texture - t2.texture).norm() > 1e-9) ++differing;
  }
  CHECK(differing == 100);
}

TEST_CASE("style vectors follow the base/shape/texture routing") {
  Generator<double> g(tiny_generator(), 4);
  Rng rng(8);
  auto triple = g.map_latent(nn::normal_vector<double>(rng, 8, 1.0));
  const auto before = g.style_vectors(triple, 1);

  auto texture_changed = triple;
  texture_changed.texture += nn::normal_vector<double>(rng, 8, 1.0);
  const auto after_texture = g.style_vectors(texture_changed, 1);
  for (int l = 0; l <= 5; ++l) CHECK(after_texture[l] == before[l]);
  bool any = false;
  for (int l = 6; l <= 9; ++l) any |= after_texture[l] != before[l];
  CHECK(any);

  auto shape_changed = triple;
  shape_changed.shape += nn::normal_vector<double>(rng, 8, 1.0);
  const auto after_shape = g.style_vectors(shape_changed, 1);
  for (int l = 6; l <= 9; ++l) CHECK(after_shape[l] == before[l]);
  for (int l = 0; l <= 1; ++l) CHECK(after_shape[l] == before[l]);

  CHECK_THROWS_AS(g.style_vectors(triple, 3), std::invalid_argument);

  // Distinct per-class heads over several initializations.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Generator<double> h(tiny_generator(), seed);
    const auto t = h.map_latent(nn::normal_vector<double>(rng, 8, 1.0));
    for (int l = 0; l < GeneratorConfig::kLayers; ++l) CHECK(h.style_vector(t, 0, l) != h.style_vector(t, 2, l));
  }
}

TEST_CASE("local_generate: depth ignores texture layers and starts at zero") {
  Generator<double> g(tiny_generator(), 9);
  Rng rng(2);
  const auto triple = g.map_latent(nn::normal_vector<double>(rng, 8, 1.0));
  auto styles = g.style_vectors(triple, 0);
  const auto base = g.local_generate(0, styles);
  CHECK(base.depth.cwiseAbs().maxCoeff() == 0.0);
  CHECK(base.features.rows() == 5);
  CHECK(base.features.cols() == 16);

  const auto again = g.local_generate(0, styles);
  CHECK(same_bits(base.features, again.features));

  // Give the depth head weights, then perturb the texture style.
  scenegan::testing::jitter(g.parameters(), 77);
  const auto ref = g.local_generate(0, styles);
  CHECK(ref.depth.cwiseAbs().maxCoeff() > 0.0);
  styles[9] += nn::normal_vector<double>(rng, 8, 1.0);
  const auto moved = g.local_generate(0, styles);
  CHECK(same_bits(ref.depth, moved.depth));
  CHECK(!same_bits(ref.features, moved.features));

  styles.pop_back();
  CHECK_THROWS_AS(g.local_generate(0, styles), std::invalid_argument);
}

TEST_CASE("compose matches the softmax and weighted-sum definitions") {
  SUBCASE("equal depths give uniform masks") {
    Matrix<double> d = Matrix<double>::Constant(4, 3, 0.7);
    std::vector<Matrix<double>> f(4, Matrix<double>::Ones(2, 3));
    const auto [m, fused] = compose<double>(d, f);
    CHECK((m.array() - 0.25).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("saturated depth selects one class") {
    Matrix<double> d = Matrix<double>::Zero(3, 1);
    d(0, 0) = 40;
    Rng rng(1);
    std::vector<Matrix<double>> f;
    for (int c = 0; c < 3; ++c) f.push_back(Matrix<double>(nn::normal_vector<double>(rng, 2, 1.0)));
    const auto [m, fused] = compose<double>(d, f);
    CHECK(std::abs(m(0, 0) - 1.0) < 1e-12);
    CHECK((fused - f[0]).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random 3-class 2x2 instances match the scalar oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix<double> d(3, 4);
      for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = 3 * rng.normal();
      std::vector<Matrix<double>> f;
      for (int c = 0; c < 3; ++c) {
        Matrix<double> fc(2, 4);
        for (Eigen::Index i = 0; i < fc.size(); ++i) fc.data()[i] = rng.normal();
        f.push_back(fc);
      }
      Matrix<double> m_ref, f_ref;
      compose_oracle(d, f, m_ref, f_ref);
      const auto [m, fused] = compose<double>(d, f);
      CHECK((m - m_ref).cwiseAbs().maxCoeff() < 1e-7);
      CHECK((fused - f_ref).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  SUBCASE("large depths do not overflow") {
    Matrix<double> d(2, 1);
    d << 1000.0, 999.0;
    std::vector<Matrix<double>> f(2, Matrix<double>::Ones(1, 1));
    const auto [m, fused] = compose<double>(d, f);
    CHECK(m.allFinite());
    CHECK(std::abs(m.sum() - 1.0) < 1e-12);
  }
  SUBCASE("resolution mismatch is rejected") {
    Matrix<double> d = Matrix<double>::Zero(2, 4);
    std::vector<Matrix<double>> f{Matrix<double>::Zero(2, 4), Matrix<double>::Zero(2, 3)};
    CHECK_THROWS_AS(compose<double>(d, f), std::invalid_argument);
  }
}

TEST_CASE("render produces normalized masks at the output resolution") {
  GeneratorConfig cfg;
  cfg.num_classes = 4;
  cfg.latent_dim = 8;
  cfg.style_dim = 8;
  cfg.local_channels = 4;
  cfg.feature_channels = 4;
  cfg.fourier_features = 8;
  cfg.render_channels = {4, 4, 4};
  Generator<float> g(cfg, 1);
  CHECK(cfg.upsampling_stages() == 2);
  Rng rng(3);
  scenegan::testing::jitter(g.parameters(), 5, 0.2);
  Matrix<float> fused(4, 256), depth(4, 256);
  for (Eigen::Index i = 0; i < fused.size(); ++i) fused.data()[i] = static_cast<float>(rng.normal());
  for (Eigen::Index i = 0; i < depth.size(); ++i) depth.data()[i] = static_cast<float>(rng.normal());
  const auto [image, mask] = g.render(fused, depth);
  CHECK(image.height == 64);
  CHECK(image.width == 64);
  CHECK(image.values.maxCoeff() <= 1.0f);
  CHECK(image.values.minCoeff() >= -1.0f);
  CHECK((mask.values.colwise().sum().array() - 1.0f).abs().maxCoeff() < 1e-6f);
  const auto [image2, mask2] = g.render(fused, depth);
  CHECK(same_bits(image.values, image2.values));
  CHECK(same_bits(mask.values, mask2.values));
}

TEST_CASE("generate: shared triple, per-class texture and shape locality") {
  Generator<double> g(tiny_generator(4), 21);
  scenegan::testing::jitter(g.parameters(), 6, 0.2);
  Rng rng(4);
  const auto shared = g.map_latent(nn::normal_vector<double>(rng, 8, 1.0));
  const auto a = g.generate(shared);
  const auto b = g.generate(std::vector<LatentTriple<double>>(4, shared));
  CHECK(same_bits(a.image.values, b.image.values));
  CHECK(same_bits(a.mask, b.mask));
  CHECK((a.mask.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((a.final_mask.values.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);

  std::vector<LatentTriple<double>> per_class(4, shared);
  per_class[2].texture += nn::normal_vector<double>(rng, 8, 1.0);
  const auto tex = g.generate(per_class);
  CHECK(same_bits(tex.depth, a.depth));
  CHECK(same_bits(tex.mask, a.mask));
  for (int c = 0; c < 4; ++c)
    if (c != 2) CHECK(same_bits(tex.features[c], a.features[c]));
  CHECK(!same_bits(tex.features[2], a.features[2]));

  per_class.assign(4, shared);
  per_class[1].shape += nn::normal_vector<double>(rng, 8, 1.0);
  const auto shp = g.generate(per_class);
  for (int c = 0; c < 4; ++c) {
    if (c == 1) continue;
    CHECK(same_bits(shp.features[c], a.features[c]));
    CHECK(same_bits(Matrix<double>(shp.depth.row(c)), Matrix<double>(a.depth.row(c))));
  }
  CHECK(!same_bits(Matrix<double>(shp.depth.row(1)), Matrix<double>(a.depth.row(1))));
  // The softmax couples classes: masks of untouched classes move too.
  CHECK((shp.mask.row(0) - a.mask.row(0)).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS_AS(g.generate(std::vector<LatentTriple<double>>(3, shared)), std::invalid_argument);
}

TEST_CASE("analytic style and parameter gradients match central differences") {
  GeneratorConfig cfg = tiny_generator(3);
  cfg.output_resolution = 8;
  cfg.render_channels = {5, 4};
  Generator<double> g(cfg, 31);
  scenegan::testing::jitter(g.parameters(), 8, 0.25);
  Rng rng(12);
  const auto z = nn::normal_vector<double>(rng, 8, 1.0);
  const auto a = scenegan::testing::random_map<double>(rng, 3, 8, 8);
  const auto b = scenegan::testing::random_map<double>(rng, 3, 8, 8);
  auto loss = [&](const CompositionResult<double>& r) {
    return a.values.cwiseProduct(r.image.values).sum() + b.values.cwiseProduct(r.final_mask.values).sum();
  };

  GeneratorTrace<double> trace;
  g.parameters().zero_grad();
  g.forward(z, trace);
  const StyleBank<double> d_styles = g.backward(trace, a, b);

  SUBCASE("style entries") {
    const StyleBank<double> styles = trace.styles;
    for (int c = 0; c < 3; ++c) {
      for (int l : {0, 3, 5, 6, 9}) {
        for (int k : {0, 5}) {
          auto central = [&](double h) {
            StyleBank<double> plus = styles, minus = styles;
            plus.at(c, l)[k] += h;
            minus.at(c, l)[k] -= h;
            return (loss(g.generate(plus)) - loss(g.generate(minus))) / (2 * h);
          };
          CHECK(scenegan::testing::relative_error(d_styles.at(c, l)[k], central(1e-6)) < 1e-5);
        }
      }
    }
  }

  SUBCASE("parameters") {
    auto& params = g.parameters();
    int checked = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      for (Eigen::Index k : {Eigen::Index{0}, p.value.size() / 2, p.value.size() - 1}) {
        const double saved = p.value[k];
        p.value[k] = saved + 1e-6;
        const double up = loss(g.generate(g.map_latent(z)));
        p.value[k] = saved - 1e-6;
        const double down = loss(g.generate(g.map_latent(z)));
        p.value[k] = saved;
        const double numeric = (up - down) / 2e-6;
        INFO(p.name << "[" << k << "] analytic " << p.grad[k] << " numeric " << numeric);
        CHECK(std::abs(p.grad[k] - numeric) <= 1e-4 * std::max(std::abs(p.grad[k]), std::abs(numeric)) + 1e-8);
        ++checked;
      }
    }
    CHECK(checked > 100);
  }
}

TEST_CASE("fourier grid is deterministic and bounded") {
  const auto p = fourier_grid<double>(8, 16);
  CHECK(p.rows() == 8);
  CHECK(p.cols() == 256);
  CHECK(p.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(p == fourier_grid<double>(8, 16));
}

TEST_CASE("fourier grid stays below the grid Nyquist rate") {
  const auto p = fourier_grid<double>(16, 16);
  // top band: 4 cycles over 16 cells, so sin at x = 0 and x = 4 agree
  CHECK(std::abs(p(12, 0) - p(12, 4)) < 1e-12);
  CHECK(std::abs(p(12, 0) - p(12, 2)) > 0.5);
  // lowest band: one cycle, so cos flips over half the grid
  CHECK(std::abs(p(1, 0) + p(1, 8)) < 1e-12);
  CHECK(p(1, 0) > 0.9);
}
