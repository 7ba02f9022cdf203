#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pervasive::rng {

// splitmix64 finalizer (Vigna). Used only to derive substream seeds, never
// as the sampling engine itself.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Substream derivation: every independent unit of randomness (a score row, a
// Monte Carlo replicate, a grid cell) gets a stream keyed by the master seed
// and up to three counters. Row j of a dataset uses substream(seed, kRowTag, j),
// so its draws do not depend on how many other rows exist or on execution
// order; replicate r of grid cell g uses substream(seed, kReplicateTag, g, r).
constexpr std::uint64_t kRowTag = 0x524f57ULL;        // "ROW"
constexpr std::uint64_t kReplicateTag = 0x524550ULL;  // "REP"

constexpr std::uint64_t substream(std::uint64_t master, std::uint64_t a,
                                  std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(a));
    h = splitmix64(h ^ splitmix64(b));
    h = splitmix64(h ^ splitmix64(c));
    return h;
}

// Deterministic sampling stream. The engine is std::mt19937_64 (its sequence
// is pinned by the standard) and all transforms are implemented here, so a
// given (seed, call sequence) produces identical doubles on every platform.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via the Marsaglia polar method; the rejected pairs are
    // consumed from this stream only, so substreams stay independent.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Student-t with df degrees of freedom, Bailey's polar method.
    double student_t(int df) {
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return u * std::sqrt(df * (std::pow(s, -2.0 / df) - 1.0) / s);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pervasive::rng
