#include "xmb/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace xmb {

std::uint64_t Rng::index(std::uint64_t bound) {
  if (bound <= 1) return 0;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  // Largest multiple of bound representable as a count of values in [0, 2^64).
  const std::uint64_t rem = (kMax % bound + 1) % bound;
  const std::uint64_t limit = kMax - rem;  // accept r <= limit
  for (;;) {
    std::uint64_t r = engine_();
    if (rem == 0 || r <= limit) return r % bound;
  }
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index) {
  // FNV-1a over the tag, then splitmix to decorrelate.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(parent ^ h) + index);
}

}  // namespace xmb
