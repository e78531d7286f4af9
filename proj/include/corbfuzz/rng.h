#ifndef CORBFUZZ_RNG_H_
#define CORBFUZZ_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace corbfuzz {

// Deterministic generator. The standard distributions are implementation
// defined, so bounded draws are done here to keep runs reproducible across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t Below(std::uint64_t bound) {
    // Rejection sampling removes modulo bias.
    std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  // Uniform in [lo, hi].
  std::int64_t Range(std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == UINT64_MAX)
      return static_cast<std::int64_t>(engine_());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) +
                                     Below(span + 1));
  }

  // Uniform in (0, 1].
  double UnitOpen() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool Chance(std::uint64_t numerator, std::uint64_t denominator) {
    return Below(denominator) < numerator;
  }

 private:
  std::mt19937_64 engine_;
};

// Mixes values into a seed. Used to derive independent streams from
// (query, seed, field) style keys.
inline std::uint64_t MixSeed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t p : parts) {
    h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
  }
  return h;
}

}  // namespace corbfuzz

#endif  // CORBFUZZ_RNG_H_
