#pragma once

#include <cstddef>
#include <functional>

namespace poses {

// Worker count: POSES_VERIFY_THREADS when set (clamped to >= 1), otherwise
// the hardware concurrency.
int thread_cap();

// Runs fn(i) for i in [0, n) on up to thread_cap() threads in contiguous
// chunks. Each index is visited exactly once, so writes into slot i of a
// caller-owned buffer are race-free and the result is independent of the
// worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace poses
