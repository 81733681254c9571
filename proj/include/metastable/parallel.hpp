#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace metastable {

/// Job-level parallelism: every index is an independent unit whose result
/// lands in its own slot, so parallel and serial execution produce
/// bit-identical output and reductions can run in fixed order afterwards.
/// The serial variant is the reference implementation kept for testing.

template <typename T, typename Fn>
std::vector<T> map_indexed_serial(std::size_t count, Fn&& fn) {
    std::vector<T> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
}

template <typename T, typename Fn>
std::vector<T> map_indexed_parallel(std::size_t count, Fn&& fn) {
    std::vector<T> out(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (long long i = 0; i < static_cast<long long>(count); ++i)
        out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    return out;
}

/// jobs == 1 runs the serial reference; jobs == 0 uses all threads.
template <typename T, typename Fn>
std::vector<T> map_indexed(std::size_t count, int jobs, Fn&& fn) {
    if (jobs == 1) return map_indexed_serial<T>(count, fn);
#ifdef _OPENMP
    if (jobs > 1) {
        std::vector<T> out(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
        for (long long i = 0; i < static_cast<long long>(count); ++i)
            out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
        return out;
    }
#endif
    return map_indexed_parallel<T>(count, fn);
}

inline int hardware_jobs() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace metastable
