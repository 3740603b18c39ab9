#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace brf {

// Seed mixing
// -----------
// Every random stream in the library is derived from a user seed by mixing
// in stream tags with the splitmix64 finalizer below. The derivation is
// pure arithmetic on 64-bit integers, so a run is reproducible across
// platforms and independent of thread scheduling: a tree, a CV repeat or a
// grid cell always sees the same stream no matter what order it runs in.
//
//   derive_seed(seed, tag)      one derivation step
//   chain_seed(seed, {a,b,c})   repeated derivation, left to right

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + kGolden * (stream + 1));
}

inline std::uint64_t chain_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  for (std::uint64_t t : tags) seed = derive_seed(seed, t);
  return seed;
}

// Stream tags for the library's derivation points.
enum : std::uint64_t {
  kTagFold = 0xF01D,
  kTagTree = 0x7EEE,
  kTagGrid = 0x62D1,
  kTagSynth = 0x5A27,
  kTagMeta = 0x3E7A,
};

// Deterministic 64-bit generator (splitmix64). Small state, no allocation,
// identical sequences on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n). Lemire multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t cutoff = (0 - n) % n;
      while (lo < cutoff) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace brf
