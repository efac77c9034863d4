#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dasa {

// splitmix64; used to derive independent per-stage seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stages that consume randomness inside one run. Keeping the tags public lets
// callers reconstruct any stage's stream from the run seed.
enum class SeedTag : std::uint64_t {
  ae1_init = 1,
  ae1_train = 2,
  ae2_init = 3,
  ae2_train = 4,
  target_init = 5,
  finetune = 6,
  adapt_layer1 = 7,
  adapt_layer2 = 8,
  sampling = 9,
  synth = 10,
};

inline std::uint64_t derive_seed(std::uint64_t base, SeedTag tag) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(tag)));
}

// mt19937_64 is bit-specified by the standard; the distribution transforms
// below are hand-rolled so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0,1) with 53-bit resolution
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal, Box-Muller
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // index in [0, n); n must be > 0
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dasa
