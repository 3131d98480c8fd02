#pragma once

#include <cstddef>
#include <functional>

namespace riagap {

/// Worker count: RIA_GAP_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Calls body(begin, end) over disjoint chunks of `grain` indices covering
/// [0, n). Chunk boundaries depend only on (n, grain), so any body that writes
/// per-index results is schedule independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain = 4096);

}  // namespace riagap
