#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Seeded random streams with bit-stable output across platforms and builds.
// std::uniform_real_distribution / std::normal_distribution are implementation
// defined, so the uniform and Gaussian mappings are spelled out here instead.
namespace qkd {

// splitmix64 step (Steele/Lea/Flood mixer, public domain reference constants).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stream seed rule (documented in the README): mix the master seed with the
// stream label, then with the trial index. Streams with distinct labels or
// trial indices are statistically independent; the rule is pure so trials can
// run in any order or in parallel without touching shared state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::string_view label) {
    std::uint64_t s = master ^ fnv1a64(label);
    std::uint64_t h = splitmix64(s);
    s = h + trial * 0x9e3779b97f4a7c15ull;
    return splitmix64(s);
}

// xoshiro256** (Blackman/Vigna, public domain). State seeded via splitmix64
// so an all-zero state is unreachable.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed = 1) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

// One named random stream. Consumption order is part of the simulation
// contract: every draw maps to a documented protocol event.
class RandomStream {
  public:
    RandomStream() : rng_(1) {}
    explicit RandomStream(std::uint64_t seed) : rng_(seed) {}
    RandomStream(std::uint64_t master, std::uint64_t trial, std::string_view label)
        : rng_(derive_seed(master, trial, label)) {}

    std::uint64_t bits() { return rng_.next(); }

    // uniform in [0, 1): top 53 bits scaled by 2^-53
    double uniform() { return static_cast<double>(rng_.next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // fair single bit
    int bit() { return static_cast<int>(rng_.next() >> 63); }

    // Box-Muller; caches the second deviate so consumption is two uniforms per
    // pair of normals. u1 is redrawn on the (2^-53 probability) exact zero.
    double normal(double mean, double sigma) {
        if (have_cached_) {
            have_cached_ = false;
            return mean + sigma * cached_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return mean + sigma * (r * std::cos(a));
    }

  private:
    Xoshiro256 rng_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace qkd
