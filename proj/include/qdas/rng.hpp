#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace qdas {

// splitmix64 finalizer, used to derive independent sub-seeds from one
// master seed (worker ids, episode counters, retry attempts).
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b) ^ c);
}

// Deterministic RNG: mt19937_64 with hand-rolled draw functions so streams
// replay bit-exactly across standard libraries (std::*_distribution is not
// portable across implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer in [0, n). Lemire multiply-shift; bias is < n / 2^64.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be > 0");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  int uniform_int(int lo, int hi_inclusive) {
    return lo + static_cast<int>(uniform_below(
                    static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
  }

  // Categorical draw from a probability vector (assumed to sum to ~1).
  int categorical(std::span<const double> probs) {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;  // rounding overshoot
  }

  // k distinct values sampled without replacement from `pool`, in draw order.
  std::vector<int> sample_distinct(std::vector<int> pool, int k) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const auto j = uniform_below(pool.size());
      out.push_back(pool[j]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qdas
