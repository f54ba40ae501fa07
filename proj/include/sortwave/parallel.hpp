#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace sortwave {

/// Width of the parallel maps. Read once from SORTWAVE_THREADS (0 or unset
/// means the OpenMP default) unless overridden with set_thread_count().
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count). Iterations must be independent; the
/// static schedule keeps results identical to a sequential loop. If bodies
/// throw, the exception of the lowest index is rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    const auto n = static_cast<std::int64_t>(count);
    std::exception_ptr failure;
    std::int64_t failed_at = n;
    std::mutex guard;
    auto guarded = [&](std::int64_t i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            const std::lock_guard<std::mutex> lock(guard);
            if (i < failed_at) {
                failed_at = i;
                failure = std::current_exception();
            }
        }
    };
#if defined(SORTWAVE_HAVE_OPENMP)
    const int width = thread_count();
#pragma omp parallel for schedule(static) num_threads(width) if (width > 1 && n > 1)
    for (std::int64_t i = 0; i < n; ++i) guarded(i);
#else
    for (std::int64_t i = 0; i < n; ++i) guarded(i);
#endif
    if (failure) std::rethrow_exception(failure);
}

}  // namespace sortwave
