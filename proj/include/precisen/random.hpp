#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace precisen {

/// Stream identifiers keep sub-streams for different purposes disjoint even
/// when they share a seed and index.
enum class StreamPurpose : std::uint32_t {
    predictors = 1,
    outcome = 2,
    oracle_replicate = 3,
    test = 99,
};

/// A deterministic generator for the (seed, purpose, index) sub-stream.
/// Sub-streams are derived by seed_seq mixing, so block-parallel code can
/// create one per block and produce the same draws under any schedule.
std::mt19937_64 substream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index);

/// Seed from the PRECISEN_SEED environment variable, if set and parseable.
std::optional<std::uint64_t> seed_from_environment();

inline constexpr std::uint64_t default_seed = 20240707;

} // namespace precisen
