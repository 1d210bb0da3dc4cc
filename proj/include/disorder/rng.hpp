#pragma once

#include <cstdint>
#include <vector>

namespace disorder {

/// Splittable counter-based generator (splitmix64 finalizer over a keyed
/// counter).  A draw depends only on (key, counter), so identical seeds give
/// bit-identical streams on every platform, and split() derives statistically
/// independent streams for parallel work.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  CounterRng split(std::uint64_t index) const {
    return CounterRng(mix(key_ ^ 0xd1b54a32d192ed03ULL, index));
  }

  std::uint64_t next_u64() { return mix(key_, counter_++); }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }

 private:
  static std::uint64_t mix(std::uint64_t key, std::uint64_t counter) {
    std::uint64_t z = key + counter * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Samples an index from a probability vector by inverse CDF.
inline int sample_categorical(CounterRng& rng, const std::vector<double>& probs) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace disorder
