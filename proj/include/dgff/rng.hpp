#pragma once

#include <cstdint>
#include <cmath>

namespace dgff {

// Counter-based generator.  Every output is a 64-bit mix of
// (master seed, stream index, draw counter), so a replica's numbers depend
// only on its stream index and draw order within the stream -- never on
// thread scheduling or on what other streams drew.
class Rng {
public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(mix64(master_seed ^ mix64(stream + kGamma))), counter_(0) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // uniform in (0,1), never exactly 0 or 1
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // standard normal via Box-Muller; pairs are cached
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double next_exponential() { return -std::log(next_uniform()); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // multiply-shift; bias is < 2^-64 per draw, irrelevant at our scales
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  // derive a child stream deterministically (replica fan-out)
  Rng substream(std::uint64_t idx) const {
    Rng r;
    r.key_ = mix64(key_ ^ mix64(idx + kGamma));
    r.counter_ = 0;
    return r;
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace dgff
