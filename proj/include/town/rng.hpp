#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace town {

namespace detail {

inline void philox_mulhilo(std::uint32_t a, std::uint32_t b,
                           std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// One block of Philox4x32-10 (Salmon et al., SC'11 constants).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    philox_mulhilo(kMul0, ctr[0], hi0, lo0);
    philox_mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based random stream. A stream is identified by (seed, stream id);
/// streams with distinct ids are statistically independent, so per-trial
/// streams can be handed to workers in any order without affecting output.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t k = detail::splitmix64(seed ^ detail::splitmix64(stream));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    counter_ = 0;
    buf_pos_ = 4;
    has_gauss_ = false;
    gauss_ = 0.0;
  }

  /// Derive an independent child stream; deterministic in (this stream, i).
  RngStream substream(std::uint64_t i) const {
    const std::uint64_t base =
        (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
    RngStream child;
    const std::uint64_t k = detail::splitmix64(base ^ detail::splitmix64(~i));
    child.key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return child;
  }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) {
      buf_ = detail::philox4x32(
          {static_cast<std::uint32_t>(counter_),
           static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
          key_);
      ++counter_;
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool coin() { return (next_u32() & 1u) != 0; }

  /// Standard normal via Box-Muller; the spare value is cached in-stream.
  double normal() {
    if (has_gauss_) {
      has_gauss_ = false;
      return gauss_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    gauss_ = r * std::sin(t);
    has_gauss_ = true;
    return r * std::cos(t);
  }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }
  result_type operator()() { return next_u32(); }

 private:
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  bool has_gauss_ = false;
  double gauss_ = 0.0;
};

}  // namespace town
