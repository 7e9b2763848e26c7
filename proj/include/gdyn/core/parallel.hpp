#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gdyn {

/// Number of worker threads (capped by the GARMENTDYN_THREADS env var).
int worker_count();

namespace detail {
void pool_run(int ntasks, const std::function<void(int)>& task);
}

/// Runs fn(begin, end) over [0, n) in parallel. Output ranges must be
/// disjoint per index; results are then independent of the partitioning.
template <class Fn>
void parallel_for(size_t n, Fn&& fn, size_t grain = 256)
{
    if (n == 0) return;
    const int workers = worker_count();
    if (workers <= 1 || n <= grain) {
        fn(size_t(0), n);
        return;
    }
    size_t chunk = (n + size_t(workers) * 4 - 1) / (size_t(workers) * 4);
    if (chunk < grain) chunk = grain;
    const int ntasks = static_cast<int>((n + chunk - 1) / chunk);
    detail::pool_run(ntasks, [&](int t) {
        const size_t b = size_t(t) * chunk;
        const size_t e = std::min(n, b + chunk);
        fn(b, e);
    });
}

/// Deterministic parallel reduction: partials are computed over fixed-size
/// chunks and summed in chunk order, so the result does not depend on the
/// worker count.
template <class Fn>
double ordered_sum(size_t n, Fn&& partial, size_t chunk = 4096)
{
    if (n == 0) return 0.0;
    const size_t nchunks = (n + chunk - 1) / chunk;
    if (nchunks == 1 || worker_count() <= 1) {
        double acc = 0.0;
        for (size_t c = 0; c < nchunks; ++c)
            acc += partial(c * chunk, std::min(n, (c + 1) * chunk));
        return acc;
    }
    std::vector<double> parts(nchunks);
    detail::pool_run(static_cast<int>(nchunks), [&](int c) {
        const size_t b = size_t(c) * chunk;
        parts[c] = partial(b, std::min(n, b + chunk));
    });
    double acc = 0.0;
    for (double p : parts) acc += p;
    return acc;
}

} // namespace gdyn
