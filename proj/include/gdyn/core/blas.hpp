#pragma once

#include "gdyn/core/kernels.hpp"
#include "gdyn/core/parallel.hpp"
#include "gdyn/core/types.hpp"

#include <cmath>

namespace gdyn {

/// Deterministic parallel dot: fixed-size chunk partials summed in order.
inline double par_dot(const VecX& x, const VecX& y)
{
    const double* xp = x.data();
    const double* yp = y.data();
    const KernelOps& ops = kernels();
    return ordered_sum(static_cast<size_t>(x.size()),
                       [&](size_t b, size_t e) { return ops.dot(xp + b, yp + b, e - b); });
}

inline double par_norm(const VecX& x) { return std::sqrt(par_dot(x, x)); }

inline void par_axpy(double a, const VecX& x, VecX& y)
{
    const double* xp = x.data();
    double* yp = y.data();
    const KernelOps& ops = kernels();
    parallel_for(static_cast<size_t>(x.size()),
                 [&](size_t b, size_t e) { ops.axpy(a, xp + b, yp + b, e - b); }, 2048);
}

inline void par_xpay(const VecX& x, double a, VecX& y)
{
    const double* xp = x.data();
    double* yp = y.data();
    const KernelOps& ops = kernels();
    parallel_for(static_cast<size_t>(x.size()),
                 [&](size_t b, size_t e) { ops.xpay(xp + b, a, yp + b, e - b); }, 2048);
}

} // namespace gdyn
