#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace sas {

// Deterministic, platform-independent random stream (xoshiro256** core,
// splitmix64 seeding). Standard-library distributions are avoided on purpose:
// their output is implementation-defined and would break byte-level
// reproducibility of generated artifacts.
//
// Streams are cheap value types. Derived streams (see derive) decorrelate by
// hashing the parent seed together with caller-supplied indices, so per-task
// streams keyed by (seed, task index) give schedule-independent results.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { reseed(seed); }

  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t x = seed;
    for (std::uint64_t id : ids) x = mix(x ^ (id + 0x9e3779b97f4a7c15ULL));
    reseed(x);
  }

  static RngStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
    return RngStream(seed, {a, b, c});
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Unbiased (rejection on the tail).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Samples an index from an unnormalized non-negative weight vector.
  int discrete(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) throw std::invalid_argument("RngStream::discrete: weights sum to zero");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0) return static_cast<int>(i);
    }
    // Rounding can push u marginally past the last bucket; return the last
    // index with positive weight.
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0) return static_cast<int>(i);
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
      x = mix(x);
      s = x;
    }
    // All-zero state would lock the generator; mix() of any input is never
    // all-zero across four words in practice, but guard anyway.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ULL;
  }

  std::uint64_t s_[4];
};

}  // namespace sas
