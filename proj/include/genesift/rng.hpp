#pragma once

#include <cmath>
#include <cstdint>

namespace genesift {

// Keyed splitmix64 stream. Every (seed, stream, substream) triple opens an
// independent deterministic sequence, which lets parallel workers own
// disjoint streams: results do not depend on how work is scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0)
      : state_(derive(seed, stream, substream)) {}

  // Collapses a key triple into one well-mixed 64-bit value (also handy for
  // deriving child seeds).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
    std::uint64_t s = mix(seed + 0x9e3779b97f4a7c15ULL);
    s = mix(s ^ (stream + 0xbf58476d1ce4e5b9ULL));
    s = mix(s ^ (substream + 0x94d049bb133111ebULL));
    return s;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1).
  double next_open_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n), n >= 1.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double next_gaussian() {
    const double two_pi = 6.283185307179586476925286766559;
    double u1 = next_open_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace genesift
