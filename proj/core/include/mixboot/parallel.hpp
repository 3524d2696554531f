#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace mixboot {

/// Seed for stream `index` of a master seed. Streams depend only on the pair,
/// so work items can run in any order on any thread.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept;

inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(stream_seed(master, index));
}

/// Worker count actually used for a request of `threads` (0 = all cores).
unsigned resolve_threads(unsigned threads) noexcept;

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace mixboot
