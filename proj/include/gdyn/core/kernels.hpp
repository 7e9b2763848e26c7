#pragma once

#include <cstddef>

namespace gdyn {

/// Data-parallel inner loops used by the solvers and metrics. Every entry has
/// a scalar reference implementation and may have a SIMD variant; the active
/// set is picked once at startup (GARMENTDYN_SIMD=scalar|avx2 overrides).
///
/// Block-sparse rows use 3x3 blocks stored column-major padded to 4 rows
/// (12 doubles per block) so vector lanes load whole columns.
struct KernelOps {
    const char* name;

    double (*dot)(const double* x, const double* y, size_t n);
    void (*axpy)(double a, const double* x, double* y, size_t n);  // y += a*x
    void (*xpay)(const double* x, double a, double* y, size_t n);  // y = x + a*y

    // y[3r..3r+2] = sum_e blocks[e] * x[3*col[e]..], e in [row_ptr[r], row_ptr[r+1])
    void (*bcsr3_spmv)(const int* row_ptr, const int* col, const double* blocks,
                       const double* x, double* y, int row_begin, int row_end);

    // y += A*x with A m-by-n column-major, m padded to a multiple of 4 rows
    // (pad rows hold zeros).
    void (*gemv_add)(const double* a, int m, int m_stride, int n, const double* x, double* y);

    // Index of the L1-nearest point among SoA arrays; writes the distance.
    size_t (*l1_nearest)(const double* xs, const double* ys, const double* zs, size_t n,
                         double qx, double qy, double qz, double* best_dist);
};

const KernelOps& scalar_kernels();
const KernelOps& kernels(); // runtime-dispatched

constexpr int kBlockPad = 12; // doubles per stored 3x3 block

} // namespace gdyn
