#include "gdyn/core/bcsr.hpp"

#include "gdyn/core/kernels.hpp"
#include "gdyn/core/parallel.hpp"

#include <algorithm>
#include <cstring>

namespace gdyn {

void Bcsr3::build_pattern(int n_block_rows, std::vector<std::pair<int, int>> pairs)
{
    n_ = n_block_rows;
    const size_t upper = pairs.size();
    pairs.reserve(2 * upper + size_t(n_));
    for (size_t k = 0; k < upper; ++k)
        if (pairs[k].first != pairs[k].second)
            pairs.emplace_back(pairs[k].second, pairs[k].first);
    for (int i = 0; i < n_; ++i) pairs.emplace_back(i, i);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    row_ptr_.assign(size_t(n_) + 1, 0);
    col_idx_.resize(pairs.size());
    for (size_t k = 0; k < pairs.size(); ++k) {
        ++row_ptr_[size_t(pairs[k].first) + 1];
        col_idx_[k] = pairs[k].second;
    }
    for (int i = 0; i < n_; ++i) row_ptr_[size_t(i) + 1] += row_ptr_[size_t(i)];
    values_.assign(pairs.size() * kBlockPad, 0.0);
}

void Bcsr3::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

int Bcsr3::entry(int r, int c) const
{
    const int* first = col_idx_.data() + row_ptr_[r];
    const int* last = col_idx_.data() + row_ptr_[size_t(r) + 1];
    const int* it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return -1;
    return static_cast<int>(it - col_idx_.data());
}

void Bcsr3::add_block(int e, const Mat3& b)
{
    double* v = values_.data() + size_t(e) * kBlockPad;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) v[4 * j + i] += b(i, j);
}

Mat3 Bcsr3::block(int e) const
{
    Mat3 b;
    const double* v = values_.data() + size_t(e) * kBlockPad;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) b(i, j) = v[4 * j + i];
    return b;
}

void Bcsr3::multiply(const double* x, double* y) const
{
    const KernelOps& ops = kernels();
    parallel_for(size_t(n_), [&](size_t b, size_t e) {
        ops.bcsr3_spmv(row_ptr_.data(), col_idx_.data(), values_.data(), x, y,
                       static_cast<int>(b), static_cast<int>(e));
    }, 64);
}

MatX Bcsr3::dense() const
{
    MatX a = MatX::Zero(dofs(), dofs());
    for (int r = 0; r < n_; ++r)
        for (int e = row_ptr_[r]; e < row_ptr_[size_t(r) + 1]; ++e)
            a.block<3, 3>(3 * r, 3 * col_idx_[e]) = block(e);
    return a;
}

} // namespace gdyn
