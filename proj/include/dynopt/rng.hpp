#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace dynopt {

// splitmix64 step (Vigna). Used both as the core generator and as the
// stable seed mixer for matrix runs, so results do not depend on the
// standard library's distribution implementations.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stable 64-bit mix of an arbitrary list of words (seed, cell coordinates,
// run index). Order-sensitive by construction.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x2545f4914f6cdd1dull;
    for (std::uint64_t p : parts) {
        h ^= p + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        std::uint64_t s = h;
        h = splitmix64_next(s);
    }
    return h;
}

// Seeded random source. Deterministic across platforms and across runs of
// the same binary; every draw consumes a fixed number of generator steps.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // burn a couple of steps so small seeds decorrelate
        splitmix64_next(state_);
        splitmix64_next(state_);
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (no spare caching: two draws per call)
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // uniform index in [0, n)
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % n);
    }

    // fair +1 / -1
    double sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

  private:
    std::uint64_t state_;
};

}  // namespace dynopt
