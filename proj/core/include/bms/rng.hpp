#pragma once

#include <cstdint>
#include <random>

namespace bms {

// Seeded stream: mt19937_64 for bits, 53-bit uniforms, Marsaglia polar
// Gaussians. Identical sequences on any IEEE-754 platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();  // standard normal
  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }
  int uniform_int(int lo, int hi);  // inclusive

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Child stream seed for trial/stream `index` of a run seeded with `seed`
// (splitmix64 finalizer over the pair).
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace bms
