// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace mgem {

// Every random draw in the library descends from one 64-bit seed. A subsystem
// gets its own generator from derive_seed(seed, stream), where stream is one of
// the ids below (optionally combined with a task index). derive_seed mixes the
// pair with two rounds of the SplitMix64 finalizer, so distinct (seed, stream)
// pairs give statistically independent mt19937_64 states.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kBatch = 2;
inline constexpr std::uint64_t kMemory = 3;
inline constexpr std::uint64_t kMemorySplit = 4;
inline constexpr std::uint64_t kClassMeans = 5;
inline constexpr std::uint64_t kTrainSamples = 6;
inline constexpr std::uint64_t kTestSamples = 7;
inline constexpr std::uint64_t kPermutation = 8;
inline constexpr std::uint64_t kRotationPlane = 9;
inline constexpr std::uint64_t kCsvSplit = 10;
inline constexpr std::uint64_t kSelfcheck = 11;

/// Stream id for a per-task generator, e.g. for_task(kBatch, t).
constexpr std::uint64_t for_task(std::uint64_t stream, std::uint64_t task) {
  return (stream << 32) ^ task;
}
}  // namespace streams

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace mgem
