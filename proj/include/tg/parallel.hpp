#pragma once

#include <cstddef>
#include <functional>

namespace tg {

/// Worker cap: TG_THREADS when set (minimum 1), otherwise
/// hardware_concurrency.
std::size_t thread_cap();

/// Runs fn over disjoint [begin, end) chunks of [0, n), possibly on
/// several threads. Callers must only write to per-index slots so the
/// result is identical for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace tg
