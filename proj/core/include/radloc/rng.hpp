#pragma once

#include <array>
#include <cstdint>

namespace radloc {

/// SplitMix64 step: advances `state` and returns the next output.
/// Used for seed expansion and stream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from (seed, id). Substreams are
/// what make dataset generation reproducible regardless of thread count:
/// sample i always draws from derive_stream(dataset_seed, i).
constexpr std::uint64_t derive_stream(std::uint64_t seed,
                                      std::uint64_t id) noexcept {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s += (id + 1) * 0xd1342543de82ef95ull;
  h ^= splitmix64(s);
  return h;
}

/// xoshiro256++ (Blackman & Vigna). Deterministic for a given seed, which is
/// expanded through SplitMix64 so that small seeds are fine.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~0ull; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(operator()() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), n > 0, without modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = operator()();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller (second value discarded).
  double normal01() noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// One Poisson(lambda) draw. Knuth's product method below lambda = 10,
/// transformed rejection (Hormann's PTRS) above. Uses an internal
/// log-factorial table so draws do not depend on the platform's lgamma.
std::uint64_t poisson(Xoshiro256pp& rng, double lambda);

/// log(k!) via cumulative table (k < 1024) or a Stirling-De Moivre tail.
double log_factorial(std::uint64_t k);

}  // namespace radloc
