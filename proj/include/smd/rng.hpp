#pragma once

// Counter-based pseudo-random stream with cheap splitting.
//
// Every output is a pure function of (key, counter), where the key is derived
// from the seed and the counter advances by one per draw.  split(label) derives
// an independent child stream from (key, label) alone, so the layout of
// subsystem streams never depends on how many values the parent has consumed.
// All draws go through fixed integer/double arithmetic (no libm in the core
// path, and the distribution transforms below use only log/sqrt/cos), which
// keeps sequences bit-identical across platforms for a given seed.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace smd {

namespace detail {

// SplitMix64 finalizer (Stafford variant 13).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kSplitSalt = 0x5851f42d4c957f2dULL;

} // namespace detail

class RngStream {
public:
  explicit RngStream(std::uint64_t seed) noexcept
      : key_(detail::mix64(seed + detail::kGamma)) {}

  // Child stream identified by label; independent of this stream's position.
  RngStream split(std::uint64_t label) const noexcept {
    RngStream child(0);
    child.key_ = detail::mix64(key_ ^ detail::mix64((label + 1) * detail::kGamma ^ detail::kSplitSalt));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGamma);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0,n) via Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Inverse-CDF transforms.  Each consumes a fixed number of uniforms so that
  // streams stay aligned no matter which values are drawn.

  double exponential(double scale = 1.0) noexcept {
    // -scale * ln(1-U); log1p keeps precision near U=0.
    return -scale * std::log1p(-uniform());
  }

  double gumbel(double location, double scale) noexcept {
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return location - scale * std::log(-std::log(u));
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double gaussian() noexcept {
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.141592653589793238462643383279502884 * uniform());
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace smd
