#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace cplab {

/// xoshiro256** seeded through splitmix64. Streams are split by hashing
/// (seed, stream ids...) with derive_seed rather than by jump polynomials,
/// so any worker can reconstruct its stream from the master seed alone.
class Rng {
public:
    static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64";

    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal by Box-Muller; the spare deviate is cached.
    double normal();
    double normal(double mean, double stddev);
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic child seed for the stream identified by `ids` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids);

}  // namespace cplab
