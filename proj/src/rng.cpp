#include "colabel/rng.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace colabel::rng {

namespace {

constexpr std::uint64_t kSplitmixGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += kSplitmixGamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& word : s_) word = splitmix64_next(st);
    // The all-zero state is a fixed point of xoshiro256++.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = kSplitmixGamma;
}

Xoshiro256pp Xoshiro256pp::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = seed;
    for (std::uint64_t token : path) {
        std::uint64_t t = h ^ (token + kSplitmixGamma);
        h = splitmix64_next(t);
    }
    return Xoshiro256pp(h);
}

std::uint64_t Xoshiro256pp::next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256pp::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xoshiro256pp::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Xoshiro256pp::uniform_int(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
    std::uint64_t x = next();
    if (rem != 0) {
        const std::uint64_t bound = std::uint64_t{0} - rem;  // 2^64 - rem
        while (x >= bound) x = next();
    }
    return x % n;
}

double Xoshiro256pp::gaussian() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_gauss_ = r * std::sin(theta);
    has_cached_gauss_ = true;
    return r * std::cos(theta);
}

double Xoshiro256pp::gaussian(double mu, double sigma) { return mu + sigma * gaussian(); }

std::uint64_t Xoshiro256pp::poisson_small(double mean) {
    // Knuth multiplication method; requires exp(-mean) to stay normal.
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform();
    } while (p > limit);
    return k - 1;
}

std::uint64_t Xoshiro256pp::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    constexpr double chunk = 256.0;
    std::uint64_t k = 0;
    while (mean > chunk) {
        k += poisson_small(chunk);
        mean -= chunk;
    }
    return k + poisson_small(mean);
}

double Xoshiro256pp::gamma(double shape, double scale) {
    assert(shape > 0.0 && scale > 0.0);
    if (shape < 1.0) {
        const double u = 1.0 - uniform();  // (0, 1]
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform();  // (0, 1]
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

double Xoshiro256pp::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    const double sum = x + y;
    return sum > 0.0 ? x / sum : 0.5;
}

}  // namespace colabel::rng
