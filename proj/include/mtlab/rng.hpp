#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace mtlab {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Fold a sequence of values into one key. Used for order-independent
// per-cell / per-run seeds.
constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Counter-based generator with cheap substream derivation. Draw i of a
// stream depends only on (key, i), and split() derives the child key from
// the parent key alone, so results never depend on how calls interleave
// across streams. All distributions are implemented here rather than via
// <random> so that identical seeds give bitwise-identical output on every
// platform and standard library.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  SplitRng split(std::uint64_t stream) const {
    SplitRng r(*this);
    r.key_ = mix64(key_ ^ mix64(stream + 0xd1b54a32d192ed03ULL));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL); }

  // Uniform in [0, 1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Lemire reduction; bias is below 2^-64.
  std::size_t next_below(std::size_t n) {
    return std::size_t((unsigned __int128)next_u64() * n >> 64);
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller.
  double next_normal() {
    double u1;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next_below(i)]);
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace mtlab
