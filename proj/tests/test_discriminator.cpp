#include "helpers.hpp"

#include "scenegan/discriminator.hpp"
#include "scenegan/spectral_norm.hpp"

#include <Eigen/SVD>
#include <doctest.h>

using namespace scenegan;
using scenegan::testing::random_map;
using scenegan::testing::tiny_discriminator;

namespace {
double exact_sigma(const Matrix<double>& w) {
  Eigen::JacobiSVD<Matrix<double>> svd(w);
  return svd.singularValues()[0];
}
}  // namespace

TEST_CASE("spectral_normalize: analytic, isometry and exact-SVD cases") {
  Rng rng(1);
  SUBCASE("diag(3, 1) is divided by 3") {
    Matrix<double> w(2, 2);
    w << 3, 0, 0, 1;
    auto state = make_power_iteration<double>(2, 2, rng);
    const auto n = spectral_normalize(w, state, 20);
    CHECK(std::abs(state.sigma - 3.0) < 1e-9);
    CHECK(std::abs(exact_sigma(n) - 1.0) < 1e-9);
    CHECK(std::abs(n(0, 0) - 1.0) < 1e-9);
    CHECK(std::abs(n(1, 1) - 1.0 / 3.0) < 1e-9);
  }
  SUBCASE("orthogonal matrix is unchanged") {
    Matrix<double> a(4, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    const Matrix<double> q = Eigen::HouseholderQR<Matrix<double>>(a).householderQ();
    auto state = make_power_iteration<double>(4, 4, rng);
    const auto n = spectral_normalize(q, state, 20);
    CHECK((n - q).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("random 8x8 matches the exact decomposition") {
    Matrix<double> w(8, 8);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
    auto state = make_power_iteration<double>(8, 8, rng);
    const auto n = spectral_normalize(w, state, 20);
    CHECK(std::abs(state.sigma - exact_sigma(w)) / exact_sigma(w) < 1e-3);
    CHECK(std::abs(exact_sigma(n) - 1.0) < 1e-3);
  }
  SUBCASE("zero weight stays zero") {
    Matrix<double> w = Matrix<double>::Zero(3, 5);
    auto state = make_power_iteration<double>(3, 5, rng);
    const auto n = spectral_normalize(w, state, 5);
    CHECK(n.allFinite());
    CHECK(n.cwiseAbs().maxCoeff() == 0.0);
    CHECK(state.sigma == kMinSigma);
  }
}

TEST_CASE("spectral norm backward matches finite differences with fixed vectors") {
  Rng rng(4);
  Matrix<double> w(5, 7), g(5, 7);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal(), g.data()[i] = rng.normal();
  auto state = make_power_iteration<double>(5, 7, rng);
  const Matrix<double> n = spectral_normalize(w, state, 3);
  const Matrix<double> grad = spectral_norm_backward(g, n, state);
  for (int k = 0; k < 35; k += 4) {
    Matrix<double> up = w, down = w;
    up.data()[k] += 1e-6;
    down.data()[k] -= 1e-6;
    auto s1 = state, s2 = state;
    const double lu = g.cwiseProduct(spectral_normalize(up, s1, 0)).sum();
    const double ld = g.cwiseProduct(spectral_normalize(down, s2, 0)).sum();
    CHECK(scenegan::testing::relative_error(grad.data()[k], (lu - ld) / 2e-6) < 1e-5);
  }
}

TEST_CASE("discriminator score map shape, determinism and input checks") {
  DiscriminatorConfig cfg;
  cfg.mask_channels = 8;
  Discriminator<float> d(cfg, 3);
  CHECK(cfg.score_resolution() == 4);
  Rng rng(2);
  const auto image = random_map<float>(rng, 3, 64, 64, 0.5);
  const auto mask = random_map<float>(rng, 8, 64, 64, 0.5);
  const auto s1 = d.score_map(image, mask);
  CHECK(s1.height == 4);
  CHECK(s1.width == 4);
  CHECK(s1.channels() == 1);
  CHECK(s1.values == d.score_map(image, mask).values);
  CHECK_THROWS_AS(d.score_map(image, random_map<float>(rng, 7, 64, 64)), std::invalid_argument);
  CHECK_THROWS_AS(d.score_map(random_map<float>(rng, 3, 32, 32), random_map<float>(rng, 8, 32, 32)), std::invalid_argument);

  DiscriminatorConfig late = cfg;
  late.fusion_stage = 2;
  CHECK_THROWS_AS(late.validate(), std::invalid_argument);
}

TEST_CASE("every normalized conv has unit spectral norm, the score head is exempt") {
  DiscriminatorConfig cfg;
  cfg.mask_channels = 8;
  Discriminator<double> d(cfg, 7);
  d.refresh(100);
  for (int i = 0; i < d.conv_count(); ++i) {
    const double sigma = exact_sigma(d.effective_weight(i));
    if (d.is_normalized(i)) {
      CHECK(sigma >= 0.95);
      CHECK(sigma <= 1.05);
      CHECK(std::abs(d.power_states()[static_cast<std::size_t>(i)].sigma -
                     exact_sigma(d.parameters().matrix(d.conv(i).weight))) /
                exact_sigma(d.parameters().matrix(d.conv(i).weight)) <
            1e-3);
    }
  }
  CHECK(!d.is_normalized(d.conv_count() - 1));
}

TEST_CASE("scaling the input keeps scores finite and continuous") {
  Discriminator<double> d(tiny_discriminator(), 3);
  Rng rng(5);
  const auto image = random_map<double>(rng, 3, 16, 16, 0.5);
  const auto mask = random_map<double>(rng, 3, 16, 16, 0.3);
  double previous = d.score(FeatureMap<double>(image.values * 0.0, 16, 16), mask);
  for (int k = 1; k <= 20; ++k) {
    const double alpha = k / 20.0;
    const double s = d.score(FeatureMap<double>(image.values * alpha, 16, 16), mask);
    CHECK(std::isfinite(s));
    CHECK(std::abs(s - previous) < 0.5);
    previous = s;
  }
}

TEST_CASE("discriminator gradients match finite differences") {
  for (bool sn : {true, false}) {
    CAPTURE(sn);
    Discriminator<double> d(tiny_discriminator(3, sn), 11);
    scenegan::testing::jitter(d.parameters(), 3, 0.2);
    d.refresh(5);
    Rng rng(6);
    const auto image = random_map<double>(rng, 3, 16, 16, 0.5);
    const auto mask = random_map<double>(rng, 3, 16, 16, 0.5);
    const auto weights = random_map<double>(rng, 1, 2, 2);
    auto loss = [&](const FeatureMap<double>& x, const FeatureMap<double>& m) {
      return weights.values.cwiseProduct(d.score_map(x, m).values).sum();
    };

    DiscriminatorTrace<double> trace;
    d.parameters().zero_grad();
    d.forward(image, mask, trace);
    const auto [gi, gm] = d.backward(trace, weights, true);
    d.flush_gradients();

    for (int k = 0; k < 768; k += 97) {
      FeatureMap<double> up = image, down = image;
      up.values.data()[k] += 1e-5;
      down.values.data()[k] -= 1e-5;
      CHECK(scenegan::testing::relative_error(gi.values.data()[k], (loss(up, mask) - loss(down, mask)) / 2e-5) < 1e-4);
      FeatureMap<double> mu = mask, md = mask;
      mu.values.data()[k] += 1e-5;
      md.values.data()[k] -= 1e-5;
      CHECK(scenegan::testing::relative_error(gm.values.data()[k], (loss(image, mu) - loss(image, md)) / 2e-5) < 1e-4);
    }

    auto& params = d.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      for (Eigen::Index k : {Eigen::Index{0}, p.value.size() / 3, p.value.size() - 1}) {
        const double saved = p.value[k];
        p.value[k] = saved + 1e-5;
        d.refresh(0);
        const double up = loss(image, mask);
        p.value[k] = saved - 1e-5;
        d.refresh(0);
        const double down = loss(image, mask);
        p.value[k] = saved;
        d.refresh(0);
        INFO(p.name << "[" << k << "]");
        CHECK(scenegan::testing::relative_error(p.grad[k], (up - down) / 2e-5) < 1e-4);
      }
    }
  }
}
