#ifndef NQST_PARALLEL_HPP
#define NQST_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace nqst {

// Process-wide worker count used by parallel_for. Defaults to 1.
void set_thread_count(int threads);
int thread_count();

// Calls body(i) for i in [0, n), splitting the range into contiguous chunks
// across worker threads. Bodies must only write to per-index slots; callers
// reduce afterwards in index order, which keeps results independent of the
// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nqst

#endif  // NQST_PARALLEL_HPP
