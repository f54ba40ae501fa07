#include "sortwave/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#if defined(SORTWAVE_HAVE_OPENMP)
#include <omp.h>
#endif

namespace sortwave {

namespace {

int default_width() {
#if defined(SORTWAVE_HAVE_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int width_from_env() {
    const char* raw = std::getenv("SORTWAVE_THREADS");
    if (raw == nullptr || *raw == '\0') return default_width();
    try {
        const int value = std::stoi(raw);
        return value > 0 ? value : default_width();
    } catch (const std::exception&) {
        return default_width();
    }
}

std::atomic<int> g_override{0};

}  // namespace

int thread_count() {
    const int forced = g_override.load(std::memory_order_relaxed);
    if (forced > 0) return forced;
    static const int from_env = width_from_env();
    return from_env;
}

void set_thread_count(int threads) { g_override.store(threads > 0 ? threads : 0, std::memory_order_relaxed); }

}  // namespace sortwave
