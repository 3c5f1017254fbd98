#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace colabel::rng {

/// Advances a splitmix64 state and returns the next output word.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Purpose tags for derived streams. The convention across the library is
/// derive(seed, {frame_id, tag}) for per-frame streams and
/// derive(seed, {frame_id, agent_id, tag}) for per-view streams.
namespace streams {
inline constexpr std::uint64_t kPlacement = 1;  // box placement within a frame
inline constexpr std::uint64_t kCloud = 2;      // per-view surface sampling
inline constexpr std::uint64_t kNoise = 3;      // per-view localization error
inline constexpr std::uint64_t kSurrogate = 4;  // per-frame detector surrogate
inline constexpr std::uint64_t kGradCheck = 5;  // synthetic grids and boxes for checks
}  // namespace streams

/// xoshiro256++ generator with fixed, platform-independent output. All
/// distribution samplers are hand-rolled on top of next() so that a given
/// seed produces the same stream on every compiler and libc.
///
/// Streams are split by hashing a path of integer tokens into a child seed:
/// derive(seed, {frame_id, agent_id, purpose}) gives every (frame, agent,
/// purpose) combination its own independent generator, so reordering or
/// parallelizing work over frames and agents cannot change any draw.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed);

    /// Child generator for the given token path (see class comment).
    static Xoshiro256pp derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    std::uint64_t next();

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform();
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n); n must be positive. Unbiased (rejection).
    std::uint64_t uniform_int(std::uint64_t n);
    /// Standard normal via Box-Muller; the second value of each pair is
    /// cached, so draws come in deterministic pairs.
    double gaussian();
    double gaussian(double mu, double sigma);
    /// Poisson count. Large means are split into bounded chunks (counts of
    /// independent Poissons add), keeping the inversion bound representable.
    std::uint64_t poisson(double mean);
    /// Gamma(shape, scale) via Marsaglia-Tsang squeeze; shape < 1 is lifted
    /// through the Gamma(shape + 1) boost.
    double gamma(double shape, double scale = 1.0);
    /// Beta(a, b) as X / (X + Y) of two gamma draws.
    double beta(double a, double b);

  private:
    std::uint64_t poisson_small(double mean);

    std::array<std::uint64_t, 4> s_{};
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;
};

}  // namespace colabel::rng
