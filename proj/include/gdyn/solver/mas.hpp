#pragma once

#include "gdyn/core/bcsr.hpp"
#include "gdyn/core/types.hpp"

#include <vector>

namespace gdyn {

/// Multilevel additive Schwarz preconditioner. Level 0 partitions vertices
/// into non-overlapping subdomains grown by BFS over the matrix graph; every
/// coarser level aggregates one subdomain into one coarse vertex (Galerkin,
/// piecewise-constant transfer) and is partitioned the same way. apply()
/// sums the block-diagonal inverse solves of all levels.
class MasPreconditioner {
public:
    struct Config {
        int levels = 3;
        int block_size = 32; // vertices per subdomain
    };

    static MasPreconditioner build(const Bcsr3& a, const Config& config);

    void apply(const VecX& r, VecX& z) const;

    int level_count() const { return static_cast<int>(levels_.size()); }
    int block_count(int level) const
    {
        return static_cast<int>(levels_[level].member_ptr.size()) - 1;
    }

    /// Max-norm of (inv * block - I) over all blocks of a level (build check).
    double inverse_residual(int level) const { return levels_[level].inverse_residual; }

private:
    struct Level {
        int n = 0;                    // block-vertices at this level
        std::vector<int> block_of;    // vertex -> subdomain
        std::vector<int> members;     // vertices grouped by subdomain, sorted within
        std::vector<int> member_ptr;
        std::vector<double> inverses; // dense col-major 3b x 3b per block, concatenated
        std::vector<int> inverse_ptr;
        double inverse_residual = 0.0;
    };

    static std::vector<int> cluster(const Bcsr3& a, int block_size);
    static Level make_level(const Bcsr3& a, int block_size, int level_index);
    static Bcsr3 coarsen(const Bcsr3& a, const std::vector<int>& block_of, int n_coarse);

    std::vector<Level> levels_;
    mutable std::vector<VecX> scratch_r_;
    mutable std::vector<VecX> scratch_z_;
};

} // namespace gdyn
