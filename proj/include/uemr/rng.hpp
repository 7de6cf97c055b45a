#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace uemr {

// splitmix64 finaliser. Used both as the stream generator and as the mixing
// step of derive_seed; all resampling determinism rests on it.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable derivation of independent seed streams: distinct (label, counter)
// pairs give distinct streams for the same master seed, so parallel resampling
// reproduces the sequential result bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::string_view stream_label,
                                 std::uint64_t counter) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
  for (const char c : stream_label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = mix64(master_seed + 0x9e3779b97f4a7c15ULL);
  s = mix64(s ^ h);
  s = mix64(s ^ (counter + 0x9e3779b97f4a7c15ULL));
  return s ? s : 0x9e3779b97f4a7c15ULL;
}

// Counter-based generator: a Weyl sequence pushed through mix64. 64-bit state,
// platform-independent output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform index in [0, n); Lemire multiply-shift
  std::size_t next_index(std::size_t n) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::size_t>(m >> 64);
  }

  // standard normal, Box-Muller with one cached value
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace uemr
