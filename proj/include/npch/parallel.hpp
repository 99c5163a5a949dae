#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace npch {

// SplitMix64 finalizer; expands (seed, index) into an independent stream seed
// so sampled results do not depend on how work is split across workers.
constexpr std::uint64_t task_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(task_seed(seed, index));
}

// Number of workers: hardware concurrency capped by NPCH_THREADS.
std::size_t worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint;
// callers must only write to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace npch
