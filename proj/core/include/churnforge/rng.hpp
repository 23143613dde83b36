#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "churnforge/errors.hpp"

namespace churnforge {

// Deterministic random source. The engine (std::mt19937_64) and every
// transform below are pinned by this header, so one seed yields one stream
// of values on every platform. All randomness in the library flows through
// this class.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased draw from [0, n) by rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw PreconditionError("uniform_index requires n > 0");
        constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = kMax - kMax % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Inverse-CDF; 1 - uniform01() lies in (0, 1] so the log never sees zero.
    double exponential(double rate) {
        return -std::log(1.0 - uniform01()) / rate;
    }

    // Box-Muller, cosine branch only (one value per two uniforms).
    double normal() {
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Marsaglia-Tsang; shapes below 1 go through the boost gamma(shape + 1).
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = 1.0 - uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = 1.0 - uniform01();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v;
            }
        }
    }

    double beta(double alpha, double beta_shape) {
        const double a = gamma(alpha);
        const double b = gamma(beta_shape);
        const double sum = a + b;
        return sum > 0.0 ? a / sum : 0.5;
    }

private:
    std::mt19937_64 engine_;
};

// Stateless 64-bit mixer (splitmix64 finalizer).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable sub-seed for (base seed, stream id, attempt) triples.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t attempt = 0) {
    return splitmix64(splitmix64(base ^ splitmix64(stream)) + attempt);
}

// Fisher-Yates with the pinned index draw above.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_index(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace churnforge
