#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tg {

/// Deterministic pseudo-random stream (xoshiro256**). Output depends only
/// on the seed, never on platform, standard library, or thread schedule.
/// Purpose-specific substreams are derived by hashing a text label into
/// the seed, so adding a new consumer never perturbs existing streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view label) : Rng(derive_seed(seed, label)) {}

    std::uint64_t next_u64();

    /// Unbiased draw in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_double();

    /// Mixes (seed, label) into a substream seed. FNV-1a over the label,
    /// then two splitmix64 steps over the combination.
    static std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

private:
    std::array<std::uint64_t, 4> state_;
};

/// k distinct indices uniformly without replacement from [0, n), returned
/// in ascending order. Partial Fisher-Yates over an index table.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace tg
