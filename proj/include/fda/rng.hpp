#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fda {

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a master seed and a counter tuple.
/// Keys depend only on their own tuple, so adding new consumers never shifts
/// existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (auto c : path) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// SplitMix64 as a UniformRandomBitGenerator; cheap to construct, which is
/// what keyed per-(step, observer, neighbor, channel) streams need.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Stream purposes used as the first element of derive_seed paths.
enum class Stream : std::uint64_t { kInit = 1, kNoise = 2, kCell = 3 };

}  // namespace fda
