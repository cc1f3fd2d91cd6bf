#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace biphoton {

using Rng = std::mt19937_64;

/// Counter-based child seed: a SplitMix64 hash of (master, stream). Distinct
/// streams get statistically independent generators regardless of the order
/// in which they are created.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }
inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Worker count used when the caller passes threads <= 0.
int default_threads();

}  // namespace biphoton
