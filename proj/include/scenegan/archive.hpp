#pragma once

// Single-file array archive used for checkpoints and direction banks.
// Layout (little-endian), documented in docs/archive_format.md:
//   8 bytes  magic "SCNGARCH"
//   u32      format version
//   u32      reserved (0)
//   u64      header length N
//   N bytes  UTF-8 JSON header {"version", "meta", "arrays": [{name, dtype, shape, offset, count}]}
//   ...      array payloads, offsets relative to the end of the header

#include "scenegan/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace scenegan {

inline constexpr std::uint32_t kArchiveVersion = 1;

class Archive {
 public:
  nlohmann::json meta = nlohmann::json::object();

  template <typename Scalar>
  void put(const std::string& name, std::vector<std::int64_t> shape, const Scalar* data, std::size_t count) {
    Entry e;
    e.dtype = dtype_name<Scalar>();
    e.shape = std::move(shape);
    e.bytes.resize(count * sizeof(Scalar));
    std::memcpy(e.bytes.data(), data, e.bytes.size());
    if (!entries_.count(name)) order_.push_back(name);
    entries_[name] = std::move(e);
  }

  template <typename Derived>
  void put_matrix(const std::string& name, const Eigen::DenseBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> dense = m;  // row-major copy
    put<Scalar>(name, {dense.rows(), dense.cols()}, dense.data(), static_cast<std::size_t>(dense.size()));
  }

  template <typename Scalar>
  void put_vector(const std::string& name, const Vector<Scalar>& v) {
    put<Scalar>(name, {v.size()}, v.data(), static_cast<std::size_t>(v.size()));
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const std::vector<std::int64_t>& shape(const std::string& name) const { return entry(name).shape; }
  const std::vector<std::string>& names() const { return order_; }

  /// Reads an array converting from its stored dtype.
  template <typename Scalar>
  Vector<Scalar> get(const std::string& name) const {
    const auto& e = entry(name);
    if (e.dtype == "f32") return convert<float, Scalar>(e);
    if (e.dtype == "f64") return convert<double, Scalar>(e);
    if (e.dtype == "i64") return convert<std::int64_t, Scalar>(e);
    throw std::runtime_error("archive: unsupported dtype " + e.dtype);
  }

  template <typename Scalar>
  Matrix<Scalar> get_matrix(const std::string& name) const {
    const auto& s = shape(name);
    require(s.size() == 2, "archive: '" + name + "' is not a matrix");
    const Vector<Scalar> flat = get<Scalar>(name);
    return Eigen::Map<const Matrix<Scalar>>(flat.data(), s[0], s[1]);
  }

  void save(const std::filesystem::path& path) const;
  static Archive load(const std::filesystem::path& path);

 private:
  struct Entry {
    std::string dtype;
    std::vector<std::int64_t> shape;
    std::vector<char> bytes;
  };

  template <typename Scalar>
  static std::string dtype_name() {
    if constexpr (std::is_same_v<Scalar, float>) return "f32";
    else if constexpr (std::is_same_v<Scalar, double>) return "f64";
    else if constexpr (std::is_same_v<Scalar, std::int64_t>) return "i64";
    else static_assert(sizeof(Scalar) == 0, "unsupported archive dtype");
  }

  template <typename Stored, typename Scalar>
  static Vector<Scalar> convert(const Entry& e) {
    const std::size_t n = e.bytes.size() / sizeof(Stored);
    std::vector<Stored> raw(n);
    std::memcpy(raw.data(), e.bytes.data(), e.bytes.size());
    Vector<Scalar> out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(raw[i]);
    return out;
  }

  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::runtime_error("archive: missing array '" + name + "'");
    return it->second;
  }

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

}  // namespace scenegan
