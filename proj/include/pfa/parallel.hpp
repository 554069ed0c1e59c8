#pragma once

#include <cstddef>
#include <functional>

namespace pfa {

/// Worker count: PFA_WORKERS if set and positive, else hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pfa
