// AVX2/FMA variants of the inner-loop kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; callers go through kernels().

#include "gdyn/core/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace gdyn {
namespace {

double dot_avx2(const double* x, const double* y, size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double s = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, size_t n)
{
    const __m256d av = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpay_avx2(const double* x, double a, double* y, size_t n)
{
    const __m256d av = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_fmadd_pd(av, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, v);
    }
    for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void bcsr3_spmv_avx2(const int* row_ptr, const int* col, const double* blocks,
                     const double* x, double* y, int row_begin, int row_end)
{
    for (int r = row_begin; r < row_end; ++r) {
        __m256d acc = _mm256_setzero_pd();
        for (int e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
            const double* b = blocks + size_t(e) * kBlockPad;
            const double* xc = x + 3 * col[e];
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(b + 0), _mm256_set1_pd(xc[0]), acc);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(b + 4), _mm256_set1_pd(xc[1]), acc);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(b + 8), _mm256_set1_pd(xc[2]), acc);
        }
        double lanes[4];
        _mm256_storeu_pd(lanes, acc);
        y[3 * r + 0] = lanes[0];
        y[3 * r + 1] = lanes[1];
        y[3 * r + 2] = lanes[2];
    }
}

void gemv_add_avx2(const double* a, int m, int m_stride, int n, const double* x, double* y)
{
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        __m256d acc = _mm256_loadu_pd(y + i);
        for (int j = 0; j < n; ++j)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + size_t(j) * m_stride + i),
                                  _mm256_set1_pd(x[j]), acc);
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < m; ++i) {
        double acc = y[i];
        for (int j = 0; j < n; ++j) acc += a[size_t(j) * m_stride + i] * x[j];
        y[i] = acc;
    }
}

size_t l1_nearest_avx2(const double* xs, const double* ys, const double* zs, size_t n,
                       double qx, double qy, double qz, double* best_dist)
{
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d qxv = _mm256_set1_pd(qx);
    const __m256d qyv = _mm256_set1_pd(qy);
    const __m256d qzv = _mm256_set1_pd(qz);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d best_idx = _mm256_setzero_pd();
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d four = _mm256_set1_pd(4.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(_mm256_loadu_pd(xs + i), qxv));
        __m256d dy = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(_mm256_loadu_pd(ys + i), qyv));
        __m256d dz = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(_mm256_loadu_pd(zs + i), qzv));
        __m256d d = _mm256_add_pd(_mm256_add_pd(dx, dy), dz);
        __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, d, lt);
        best_idx = _mm256_blendv_pd(best_idx, idx, lt);
        idx = _mm256_add_pd(idx, four);
    }
    double bd[4], bi[4];
    _mm256_storeu_pd(bd, best);
    _mm256_storeu_pd(bi, best_idx);
    double bbest = std::numeric_limits<double>::infinity();
    size_t bbest_i = 0;
    for (int l = 0; l < 4; ++l) {
        if (bd[l] < bbest) {
            bbest = bd[l];
            bbest_i = static_cast<size_t>(bi[l]);
        }
    }
    for (; i < n; ++i) {
        const double d = std::abs(xs[i] - qx) + std::abs(ys[i] - qy) + std::abs(zs[i] - qz);
        if (d < bbest) {
            bbest = d;
            bbest_i = i;
        }
    }
    *best_dist = bbest;
    return bbest_i;
}

} // namespace

namespace detail {
const KernelOps& avx2_kernels()
{
    static const KernelOps ops = {
        "avx2",        dot_avx2,        axpy_avx2,
        xpay_avx2,     bcsr3_spmv_avx2, gemv_add_avx2,
        l1_nearest_avx2,
    };
    return ops;
}
} // namespace detail

} // namespace gdyn

#endif // __AVX2__
