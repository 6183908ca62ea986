#pragma once

// Counter-based random number generation (Philox 4x32-10).
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
//
// Every consumer of randomness owns a CounterRng keyed by (seed, stream id),
// where the stream id is mixed from a purpose tag plus up to three integer
// coordinates (model, fold, chain, replicate, ...). Streams are independent
// and insensitive to the order in which other streams are consumed, which is
// what makes runs reproducible under any thread schedule.

#include <cstdint>
#include <cmath>

namespace pcv {

// SplitMix64 finalizer, used to hash stream coordinates into a key.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class StreamKind : std::uint64_t {
  ChainSampling = 1,  // HMC transitions of one (model, fold, chain)
  ChainInit = 2,      // warm-start index draws
  FullData = 3,       // full-data adaptation chains
  Simulate = 4,       // dataset simulators
  KFold = 5,          // random K-fold partition
  Benchmark = 6,      // shuffle-benchmark replicates
  StepInit = 7,       // initial step-size search
};

inline constexpr std::uint64_t stream_key(StreamKind kind, std::uint64_t a = 0,
                                          std::uint64_t b = 0,
                                          std::uint64_t c = 0) {
  std::uint64_t k = mix64(static_cast<std::uint64_t>(kind));
  k = mix64(k ^ a);
  k = mix64(k ^ b);
  k = mix64(k ^ c);
  return k;
}

class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}

  CounterRng(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return buf_[4 - have_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform on (0,1); never returns an endpoint, so log() is safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Jump straight to the given 128-bit block counter position (low 64 bits);
  // discards any buffered output.
  void skip_to(std::uint64_t block) {
    ctr_[0] = static_cast<std::uint32_t>(block);
    ctr_[1] = static_cast<std::uint32_t>(block >> 32);
    have_ = 0;
    has_cached_ = false;
  }

  // Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
    for (;;) {
      const std::uint64_t v = next_u64();
      if (v < bound) return v % n;
    }
  }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                      std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
  }

  void refill() {
    std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t lo0, hi0, lo1, hi1;
      mulhilo(0xD2511F53u, c0, lo0, hi0);
      mulhilo(0xCD9E8D57u, c2, lo1, hi1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_[0] = c0;
    buf_[1] = c1;
    buf_[2] = c2;
    buf_[3] = c3;
    have_ = 4;
    if (++ctr_[0] == 0) ++ctr_[1];  // 64-bit draw counter
  }

  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int have_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace pcv
