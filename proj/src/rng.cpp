#include "steinmed/rng.hpp"

namespace steinmed::rng {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, Domain domain, std::uint64_t index) noexcept {
  return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(domain)) + index);
}

Engine make_stream(std::uint64_t seed, Domain domain, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(stream_key(seed, domain, index)),
                    static_cast<std::uint32_t>(stream_key(seed, domain, index) >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

std::size_t uniform_index(Engine& engine, std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine);
}

}  // namespace steinmed::rng
