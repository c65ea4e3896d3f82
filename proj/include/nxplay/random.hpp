#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nxplay {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a root seed and a path of stream keys into one seed. Every random
// stream in the pipeline is addressed this way so results never depend on
// scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(root);
  for (std::uint64_t key : path) h = mix64(h ^ mix64(key + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream keys, kept distinct so derived streams never alias.
namespace stream {
inline constexpr std::uint64_t kCompose = 0xC0;
inline constexpr std::uint64_t kRollout = 0xA1;
inline constexpr std::uint64_t kRun = 0x52;
inline constexpr std::uint64_t kEval = 0xE7;
inline constexpr std::uint64_t kCheckpointEval = 0xCE;
}  // namespace stream

// Platform-independent generator: mt19937_64 output is fixed by the standard,
// and the distributions below are written out instead of using <random>'s
// implementation-defined ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); bound > 0. Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nxplay
