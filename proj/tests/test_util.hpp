#pragma once

#include "gdyn/core/types.hpp"

#include <random>

namespace gdyn::test {

inline std::mt19937_64 rng(uint64_t seed = 1234) { return std::mt19937_64(seed); }

inline Vec3 random_vec(std::mt19937_64& gen, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    return Vec3(dist(gen), dist(gen), dist(gen));
}

inline std::vector<Vec3> random_cloud(std::mt19937_64& gen, int n, double scale = 1.0)
{
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) p = scale * random_vec(gen);
    return pts;
}

/// Central finite differences of a scalar function of the flat state vector.
template <class F>
VecX fd_gradient(const F& f, VecX x, double step = 1e-6)
{
    VecX g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double old = x[i];
        x[i] = old + step;
        const double fp = f(x);
        x[i] = old - step;
        const double fm = f(x);
        x[i] = old;
        g[i] = (fp - fm) / (2 * step);
    }
    return g;
}

/// Componentwise relative mismatch, ignoring components below `floor`.
inline double gradient_mismatch(const VecX& analytic, const VecX& numeric, double floor = 1e-8)
{
    double worst = 0.0;
    for (int i = 0; i < analytic.size(); ++i) {
        const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
        if (scale < floor) continue;
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

} // namespace gdyn::test
