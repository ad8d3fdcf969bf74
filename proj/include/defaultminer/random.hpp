#pragma once

#include <cstdint>

namespace defaultminer {

// Deterministic 64-bit generator (splitmix64). Every random draw in the
// library goes through this class so that results are reproducible from a
// seed alone, independent of platform and thread count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Derives an independent substream seed from (master, stream). Substreams for
// distinct stream indices do not collide in practice, which is all the
// evaluation protocol needs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  SplitMix64 rng(master ^ (stream * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL));
  rng.next();
  return rng.next();
}

}  // namespace defaultminer
