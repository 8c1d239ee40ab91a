#pragma once

#include <cstddef>
#include <functional>

namespace stablefield {

/// Worker count to use: `requested` if positive, otherwise the hardware
/// concurrency; always capped by the STABLEFIELD_THREADS environment variable
/// when it is set to a positive integer.
std::size_t worker_count(std::size_t requested = 0);

/// Runs body(begin, end) over disjoint chunks covering [0, n). Chunks are
/// claimed dynamically, so body must only write to slots it owns.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t chunk = 0);

}  // namespace stablefield
