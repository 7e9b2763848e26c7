#include "gdyn/solver/mas.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/core/kernels.hpp"
#include "gdyn/core/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <queue>

namespace gdyn {

// Subdomains are grown by BFS over the matrix graph (lowest-index seed
// first), which keeps them spatially compact on mesh-like sparsity. Thin
// index-order strips condition markedly worse.
std::vector<int> MasPreconditioner::cluster(const Bcsr3& a, int block_size)
{
    const int n = a.rows();
    std::vector<int> block_of(n, -1);
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    int next_block = 0;
    std::vector<int> frontier;
    for (int seed = 0; seed < n; ++seed) {
        if (block_of[seed] >= 0) continue;
        int count = 0;
        frontier.clear();
        frontier.push_back(seed);
        block_of[seed] = next_block;
        ++count;
        size_t head = 0;
        while (head < frontier.size() && count < block_size) {
            const int v = frontier[head++];
            for (int e = rp[v]; e < rp[size_t(v) + 1] && count < block_size; ++e) {
                const int c = ci[e];
                if (block_of[c] >= 0) continue;
                block_of[c] = next_block;
                frontier.push_back(c);
                ++count;
            }
        }
        ++next_block;
    }
    return block_of;
}

MasPreconditioner::Level MasPreconditioner::make_level(const Bcsr3& a, int block_size,
                                                       int level_index)
{
    Level level;
    level.n = a.rows();
    level.block_of = cluster(a, block_size);
    const int nblocks = 1 + *std::max_element(level.block_of.begin(), level.block_of.end());

    // member lists, ordered by vertex index within each block
    level.member_ptr.assign(size_t(nblocks) + 1, 0);
    for (int v = 0; v < level.n; ++v) ++level.member_ptr[size_t(level.block_of[v]) + 1];
    for (int b = 0; b < nblocks; ++b) level.member_ptr[size_t(b) + 1] += level.member_ptr[b];
    level.members.resize(level.n);
    {
        std::vector<int> cursor(level.member_ptr.begin(), level.member_ptr.end() - 1);
        for (int v = 0; v < level.n; ++v) level.members[cursor[level.block_of[v]]++] = v;
    }

    level.inverse_ptr.assign(size_t(nblocks) + 1, 0);
    for (int b = 0; b < nblocks; ++b) {
        const int nv = level.member_ptr[b + 1] - level.member_ptr[b];
        level.inverse_ptr[b + 1] = level.inverse_ptr[b] + 9 * nv * nv;
    }
    level.inverses.assign(level.inverse_ptr[nblocks], 0.0);

    std::vector<double> residuals(nblocks, 0.0);
    parallel_for(size_t(nblocks), [&](size_t bb, size_t be) {
        for (size_t b = bb; b < be; ++b) {
            const int m0 = level.member_ptr[b];
            const int nv = level.member_ptr[b + 1] - m0;
            const int m = 3 * nv;
            MatX block = MatX::Zero(m, m);
            for (int r = 0; r < nv; ++r) {
                const int vr = level.members[m0 + r];
                const auto& rp = a.row_ptr();
                const auto& ci = a.col_idx();
                for (int e = rp[vr]; e < rp[size_t(vr) + 1]; ++e) {
                    const int c = ci[e];
                    if (level.block_of[c] != static_cast<int>(b)) continue;
                    // column position within the block: members are sorted
                    const auto it = std::lower_bound(level.members.begin() + m0,
                                                     level.members.begin() + m0 + nv, c);
                    const int lc = static_cast<int>(it - (level.members.begin() + m0));
                    block.block<3, 3>(3 * r, 3 * lc) = a.block(e);
                }
            }
            const MatX inv = block.partialPivLu().inverse();
            residuals[b] = (inv * block - MatX::Identity(m, m)).cwiseAbs().maxCoeff();
            std::copy(inv.data(), inv.data() + m * m,
                      level.inverses.begin() + level.inverse_ptr[b]);
        }
    }, 1);
    for (int b = 0; b < nblocks; ++b) {
        if (!(residuals[b] <= 1e-8))
            throw SingularBlock(level_index, b, "MAS block inverse check failed");
        level.inverse_residual = std::max(level.inverse_residual, residuals[b]);
    }
    return level;
}

Bcsr3 MasPreconditioner::coarsen(const Bcsr3& a, const std::vector<int>& block_of, int n_coarse)
{
    std::vector<std::pair<int, int>> pairs;
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    for (int r = 0; r < a.rows(); ++r) {
        const int cr = block_of[r];
        for (int e = rp[r]; e < rp[size_t(r) + 1]; ++e) {
            const int cc = block_of[ci[e]];
            if (cr <= cc) pairs.emplace_back(cr, cc);
        }
    }
    Bcsr3 coarse;
    coarse.build_pattern(n_coarse, std::move(pairs));
    for (int r = 0; r < a.rows(); ++r) {
        const int cr = block_of[r];
        for (int e = rp[r]; e < rp[size_t(r) + 1]; ++e)
            coarse.add_block(coarse.entry(cr, block_of[ci[e]]), a.block(e));
    }
    return coarse;
}

MasPreconditioner MasPreconditioner::build(const Bcsr3& a, const Config& config)
{
    MasPreconditioner p;
    Bcsr3 coarse;
    const Bcsr3* current = &a;
    for (int l = 0; l < config.levels; ++l) {
        p.levels_.push_back(make_level(*current, config.block_size, l));
        const Level& lev = p.levels_.back();
        const int nblocks = static_cast<int>(lev.member_ptr.size()) - 1;
        if (nblocks <= 1) break; // single subdomain; coarser levels add nothing
        if (l + 1 < config.levels) {
            coarse = coarsen(*current, lev.block_of, nblocks);
            current = &coarse;
        }
    }
    p.scratch_r_.resize(p.levels_.size());
    p.scratch_z_.resize(p.levels_.size());
    for (size_t l = 0; l < p.levels_.size(); ++l) {
        p.scratch_r_[l].resize(3 * p.levels_[l].n);
        p.scratch_z_[l].resize(3 * p.levels_[l].n);
    }
    return p;
}

void MasPreconditioner::apply(const VecX& r, VecX& z) const
{
    const KernelOps& ops = kernels();
    const int nlevels = level_count();

    scratch_r_[0] = r;
    // Restrict: coarse residual = sum of fine residuals per aggregate.
    for (int l = 0; l + 1 < nlevels; ++l) {
        const Level& fine = levels_[l];
        VecX& rc = scratch_r_[size_t(l) + 1];
        rc.setZero();
        const VecX& rf = scratch_r_[l];
        for (int v = 0; v < fine.n; ++v)
            rc.segment<3>(3 * fine.block_of[v]) += rf.segment<3>(3 * v);
    }

    // Block-diagonal solves per level (gather, dense apply, scatter).
    for (int l = 0; l < nlevels; ++l) {
        const Level& level = levels_[l];
        const VecX& rl = scratch_r_[l];
        VecX& zl = scratch_z_[l];
        const int nblocks = static_cast<int>(level.member_ptr.size()) - 1;
        parallel_for(size_t(nblocks), [&](size_t bb, size_t be) {
            std::vector<double> rg, zg;
            for (size_t b = bb; b < be; ++b) {
                const int m0 = level.member_ptr[b];
                const int nv = level.member_ptr[b + 1] - m0;
                const int m = 3 * nv;
                rg.resize(m);
                zg.assign(m, 0.0);
                for (int k = 0; k < nv; ++k) {
                    const int v = level.members[m0 + k];
                    rg[3 * k + 0] = rl[3 * v + 0];
                    rg[3 * k + 1] = rl[3 * v + 1];
                    rg[3 * k + 2] = rl[3 * v + 2];
                }
                ops.gemv_add(level.inverses.data() + level.inverse_ptr[b], m, m, m, rg.data(),
                             zg.data());
                for (int k = 0; k < nv; ++k) {
                    const int v = level.members[m0 + k];
                    zl[3 * v + 0] = zg[3 * k + 0];
                    zl[3 * v + 1] = zg[3 * k + 1];
                    zl[3 * v + 2] = zg[3 * k + 2];
                }
            }
        }, 1);
    }

    // Prolongate and sum, coarsest first.
    for (int l = nlevels - 2; l >= 0; --l) {
        const Level& fine = levels_[l];
        VecX& zf = scratch_z_[l];
        const VecX& zc = scratch_z_[size_t(l) + 1];
        for (int v = 0; v < fine.n; ++v)
            zf.segment<3>(3 * v) += zc.segment<3>(3 * fine.block_of[v]);
    }
    z = scratch_z_[0];
}

} // namespace gdyn
