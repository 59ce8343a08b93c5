#pragma once

#include <cstdint>
#include <functional>

namespace kh {

/// Worker cap: KHESSIAN_THREADS if set (positive integer), else the
/// machine default. Always >= 1.
int worker_count();

/// Runs fn(i) for i in [0, n). Work is split into fixed-size chunks whose
/// boundaries do not depend on the thread count, so any per-chunk
/// accumulation a caller performs stays bit-reproducible. fn must only
/// write to disjoint state per index.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

} // namespace kh
