#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace scenegan {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row-major so that a (channels x pixels) map keeps each channel plane contiguous.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A single-sample channel-major feature map: `values` is channels x (height * width).
template <typename Scalar>
struct FeatureMap {
  Matrix<Scalar> values;
  int height = 0;
  int width = 0;

  FeatureMap() = default;
  FeatureMap(int channels, int h, int w) : values(Matrix<Scalar>::Zero(channels, h * w)), height(h), width(w) {}
  FeatureMap(Matrix<Scalar> v, int h, int w) : values(std::move(v)), height(h), width(w) {
    if (values.cols() != h * w) throw std::invalid_argument("feature map: pixel count does not match height*width");
  }

  int channels() const { return static_cast<int>(values.rows()); }
  int pixels() const { return height * width; }
  Scalar& at(int c, int y, int x) { return values(c, y * width + x); }
  Scalar at(int c, int y, int x) const { return values(c, y * width + x); }

  template <typename Other>
  FeatureMap<Other> cast() const {
    return FeatureMap<Other>(values.template cast<Other>(), height, width);
  }
};

using Image = FeatureMap<float>;

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace scenegan
