#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace xmb {

/// Deterministic random source used everywhere randomness is needed.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are not (their algorithms
/// vary between implementations), so every derived draw is defined here:
///
///   index(bound)  rejection sampling on raw 64-bit outputs: draw r, accept
///                 when r < 2^64 - (2^64 mod bound), return r mod bound.
///   uniform01()   (r >> 11) * 2^-53, in [0, 1).
///   normal()      Box-Muller on two uniform01() draws u1, u2 with
///                 u1 replaced by 1 - u1 so the log argument is in (0, 1];
///                 returns sqrt(-2 ln u1) cos(2 pi u2). No caching.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::uint64_t index(std::uint64_t bound);
  double uniform01();
  double normal();

  /// Fisher-Yates, i from n-1 down to 1, swapping i with index(i + 1).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for a randomized sub-task, mixed from a parent seed, a tag and an index.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index);

}  // namespace xmb
