#include "gdyn/core/kernels.hpp"

#include <cmath>
#include <limits>

namespace gdyn {
namespace {

double dot_scalar(const double* x, const double* y, size_t n)
{
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, size_t n)
{
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay_scalar(const double* x, double a, double* y, size_t n)
{
    for (size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void bcsr3_spmv_scalar(const int* row_ptr, const int* col, const double* blocks,
                       const double* x, double* y, int row_begin, int row_end)
{
    for (int r = row_begin; r < row_end; ++r) {
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
        for (int e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
            const double* b = blocks + size_t(e) * kBlockPad;
            const double* xc = x + 3 * col[e];
            // columns padded to 4 rows
            acc0 += b[0] * xc[0] + b[4] * xc[1] + b[8] * xc[2];
            acc1 += b[1] * xc[0] + b[5] * xc[1] + b[9] * xc[2];
            acc2 += b[2] * xc[0] + b[6] * xc[1] + b[10] * xc[2];
        }
        y[3 * r + 0] = acc0;
        y[3 * r + 1] = acc1;
        y[3 * r + 2] = acc2;
    }
}

void gemv_add_scalar(const double* a, int m, int m_stride, int n, const double* x, double* y)
{
    for (int j = 0; j < n; ++j) {
        const double xj = x[j];
        const double* colj = a + size_t(j) * m_stride;
        for (int i = 0; i < m; ++i) y[i] += colj[i] * xj;
    }
}

size_t l1_nearest_scalar(const double* xs, const double* ys, const double* zs, size_t n,
                         double qx, double qy, double qz, double* best_dist)
{
    double best = std::numeric_limits<double>::infinity();
    size_t best_i = 0;
    for (size_t i = 0; i < n; ++i) {
        const double d = std::abs(xs[i] - qx) + std::abs(ys[i] - qy) + std::abs(zs[i] - qz);
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    *best_dist = best;
    return best_i;
}

} // namespace

const KernelOps& scalar_kernels()
{
    static const KernelOps ops = {
        "scalar",        dot_scalar,      axpy_scalar,
        xpay_scalar,     bcsr3_spmv_scalar, gemv_add_scalar,
        l1_nearest_scalar,
    };
    return ops;
}

} // namespace gdyn
