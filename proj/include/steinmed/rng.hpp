#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace steinmed::rng {

using Engine = std::mt19937_64;

/// Stream domains keep bootstrap, simulation and CSE resampling draws apart
/// even when they share a user seed.
enum class Domain : std::uint64_t {
  Bootstrap = 0x6b6f6f7473746f62ULL,
  Simulation = 0x6e6f6974616c756dULL,
  CseBootstrap = 0x7061727473657363ULL,
  Fixture = 0x6572757478696678ULL,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based key for (seed, domain, index); a pure function of its inputs.
std::uint64_t stream_key(std::uint64_t seed, Domain domain, std::uint64_t index) noexcept;

Engine make_stream(std::uint64_t seed, Domain domain, std::uint64_t index);

/// Uniform draw from {0, ..., n-1}.
std::size_t uniform_index(Engine& engine, std::size_t n);

}  // namespace steinmed::rng
