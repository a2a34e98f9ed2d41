#pragma once

// Portable seeded random draws.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The distributions in <random> are implementation-defined, so every
// draw used by the toolkit is derived here from raw engine output. A given seed
// therefore reproduces the same datasets, folds and tuning splits on any
// conforming standard library.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace popbias {

/// splitmix64 finalizer; used to derive independent sub-seeds from one seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Rejection on the top of the range keeps the draw exactly uniform.
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
        std::uint64_t x = engine_();
        while (x > limit) x = engine_();
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Standard normal via the Marsaglia polar method (spare value discarded).
    double standard_normal() {
        for (;;) {
            const double a = 2.0 * uniform01() - 1.0;
            const double b = 2.0 * uniform01() - 1.0;
            const double s = a * a + b * b;
            if (s > 0.0 && s < 1.0) return a * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    double normal(double mean, double sd) { return mean + sd * standard_normal(); }

    /// Poisson draw by Knuth's product-of-uniforms method. Intended for the
    /// small means (1..10) the synthesis rules use.
    int poisson(double lambda) {
        const double limit = std::exp(-lambda);
        double product = uniform01();
        int k = 0;
        while (product > limit) {
            ++k;
            product *= uniform01();
        }
        return k;
    }

    /// Fisher-Yates shuffle driven by below().
    template <class T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace popbias
