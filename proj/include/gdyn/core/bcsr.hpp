#pragma once

#include "gdyn/core/types.hpp"

#include <utility>
#include <vector>

namespace gdyn {

/// Symmetric sparse matrix of 3x3 blocks in compressed block-row form.
/// Blocks are stored column-major with rows padded to 4 (see kernels.hpp).
/// The sparsity pattern is built once from an (i, j) pair list; values are
/// accumulated in a deterministic order independent of thread count.
class Bcsr3 {
public:
    Bcsr3() = default;

    /// pairs must contain (i, j) with i <= j; the transpose entries are added
    /// automatically and the diagonal is always present.
    void build_pattern(int n_block_rows, std::vector<std::pair<int, int>> pairs);

    int rows() const { return n_; } // block rows
    int dofs() const { return 3 * n_; }

    void set_zero();

    /// Entry index for block (r, c); -1 when not in the pattern.
    int entry(int r, int c) const;

    void add_block(int e, const Mat3& b);
    Mat3 block(int e) const;

    /// y = A x (parallel over block rows, deterministic).
    void multiply(const double* x, double* y) const;
    void multiply(const VecX& x, VecX& y) const { multiply(x.data(), y.data()); }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }

    MatX dense() const;

private:
    int n_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_; // kBlockPad doubles per entry
};

} // namespace gdyn
