#pragma once
// Deterministic counter-free RNG with cheap substream derivation.
// splitmix64 core; substreams are keyed by (master seed, purpose tag, index)
// so reordering unrelated draws cannot perturb a given stream.

#include <cstdint>
#include <cmath>
#include <string_view>

namespace synthmix {

inline std::uint64_t splitmix64_next(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derive an independent stream: hash the tag into the state, then mix.
    static Rng substream(std::uint64_t master, std::string_view purpose, std::uint64_t index) {
        std::uint64_t s = master;
        (void)splitmix64_next(s);
        for (char c : purpose) {
            s ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            (void)splitmix64_next(s);
        }
        s ^= index;
        (void)splitmix64_next(s);
        return Rng(s);
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform in [0,1) with 53 random bits
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Box-Muller, one normal per call (no spare caching: keeps draw counts
    // predictable at two uniforms per normal).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

} // namespace synthmix
