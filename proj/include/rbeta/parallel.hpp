#pragma once

#include <cstddef>
#include <functional>

namespace rbeta {

/// Number of workers used when a caller passes 0.
std::size_t default_workers() noexcept;

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Items are handed
/// out from a shared counter; results must be written to slot i so the
/// output order never depends on scheduling. The first exception thrown by
/// any item is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace rbeta
