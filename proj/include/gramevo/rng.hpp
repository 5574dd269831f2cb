#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>

namespace gramevo {

// Anything that can feed the stochastic operators. Tests substitute a
// scripted source to pin down exact draw sequences.
template <typename R>
concept RandomSource = requires(R r, double sd, int n) {
    { r.uniform01() } -> std::convertible_to<double>;
    { r.gauss(sd) } -> std::convertible_to<double>;
    { r.uniform_int(n) } -> std::convertible_to<int>;
};

inline uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic random stream. Distributions are hand-rolled on top of
// mt19937_64 so that sequences are reproducible across standard libraries;
// substreams derived from (a, b) let independent work items draw without
// perturbing each other.
class Rng {
public:
    explicit Rng(uint64_t seed) : root_(seed), engine_(mix64(seed)) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // N(0, sd), Box-Muller; consumes exactly two uniform draws per call
    double gauss(double sd) {
        double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        double u2 = uniform01();
        return sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // uniform in [0, n-1]
    int uniform_int(int n) {
        return static_cast<int>((static_cast<unsigned __int128>(engine_()) * static_cast<uint64_t>(n)) >> 64);
    }

    // Independent stream keyed by (a, b); used as (generation, slot) by the
    // engine so results do not depend on evaluation order or thread count.
    Rng substream(uint64_t a, uint64_t b) const {
        return Rng(mix64(root_ + mix64(a + mix64(b))));
    }

private:
    uint64_t root_;
    std::mt19937_64 engine_;
};

}  // namespace gramevo
