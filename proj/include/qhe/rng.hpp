#pragma once

#include <cstdint>
#include <random>

namespace qhe {

// splitmix64 step; advances x and returns the next scrambled value.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded generator with deterministic child-stream derivation, so the
// same top-level seed reproduces a run no matter how many independent
// consumers (clients, protocol rounds, audit instances) pull from it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    gen_.seed(splitmix64(x));
  }

  // Independent stream labelled by index; stable across call order.
  Rng child(std::uint64_t index) const {
    std::uint64_t x = seed_;
    std::uint64_t h = splitmix64(x);
    x ^= 0x94d049bb133111ebULL * (index + 1);
    h ^= splitmix64(x);
    return Rng(h);
  }

  int bit() { return static_cast<int>(gen_() & 1u); }

  double real() {  // uniform in [0, 1)
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  std::uint64_t index(std::uint64_t n) {  // uniform in [0, n)
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }

  std::mt19937_64& engine() { return gen_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace qhe
