#pragma once

// Deterministic random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard, and all variates are derived from raw
// engine words with explicit transforms (never std:: distributions, whose
// sequences are implementation-defined). Substreams are derived from a
// (master seed, index) pair so that restart k of a search sees the same
// randomness no matter how work is scheduled.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace wcf {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class rng_stream {
public:
    explicit rng_stream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    static rng_stream substream(std::uint64_t master, std::uint64_t index) {
        return rng_stream(master ^ splitmix64(index * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull));
    }

    std::uint64_t bits() { return eng_(); }

    // Uniform on [0, 1): top 53 bits of one engine word.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
    }

    // Complex standard normal, unit total variance.
    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * 0.70710678118654752440, im * 0.70710678118654752440};
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace wcf
