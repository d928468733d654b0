#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace scenegan {

/// Seeded source of all randomness. The full state (engine and the normal
/// distribution's cached variate) round-trips through `state()`/`restore()`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

  std::string state() const {
    std::ostringstream out;
    out << engine_ << ' ' << normal_ << ' ' << uniform_;
    return out.str();
  }

  void restore(const std::string& text) {
    std::istringstream in(text);
    in >> engine_ >> normal_ >> uniform_;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Derives an independent stream seed from a root seed and a salt (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace scenegan
