#pragma once

#include <exception>

namespace esa {

/// Runs body(i) for i in [0, n) across OpenMP threads (serially without
/// OpenMP). The first exception thrown by any iteration is rethrown after the
/// loop finishes.
template <typename Body>
void parallel_for(long n, Body&& body) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(esa_parallel_for_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace esa
