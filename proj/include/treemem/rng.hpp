#pragma once

#include <cstdint>

namespace treemem {

// splitmix64 steps; the generator state advances by the golden-ratio constant
// and the output mix decorrelates nearby states. Used both as the per-path
// stream and to derive independent substream seeds, so identical
// (seed, path index) pairs give identical draws on every platform and thread
// layout.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit mantissa
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [0, n); multiply-shift mapping (deterministic, bias < 2^-64)
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }
};

// Substream for one path: decorrelate the (seed, index) pair before use.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
  g.state = g.next_u64();
  return g;
}

}  // namespace treemem
