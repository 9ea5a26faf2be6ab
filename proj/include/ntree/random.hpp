#pragma once

#include <cstdint>
#include <random>

namespace ntree {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives the seed of child stream `index` from a parent seed. Used for
/// every seed split in the project: per job, per tree node, per validation
/// split.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Stream tags so that sibling uses of one parent seed never collide.
namespace stream {
inline constexpr std::uint64_t kPartition = 0x70617274;   // "part"
inline constexpr std::uint64_t kJob = 0x6a6f62;           // "job"
inline constexpr std::uint64_t kValidation = 0x76616c;    // "val"
inline constexpr std::uint64_t kNode = 0x6e6f6465;        // "node"
inline constexpr std::uint64_t kData = 0x64617461;        // "data"
inline constexpr std::uint64_t kBayes = 0x6261796573;     // "bayes"
}  // namespace stream

}  // namespace ntree
