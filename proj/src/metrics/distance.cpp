#include "gdyn/metrics/distance.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/core/parallel.hpp"
#include "gdyn/metrics/kd_tree.hpp"

#include <algorithm>

namespace gdyn {

namespace {

// sum and max of per-point nearest distances, deterministic chunked reduce
struct SumMax {
    double sum = 0.0;
    double max = 0.0;
};

SumMax nearest_stats(const std::vector<Vec3>& from, const KdTree& tree)
{
    const size_t n = from.size();
    const size_t chunk = 256;
    const size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<SumMax> parts(nchunks);
    parallel_for(nchunks, [&](size_t cb, size_t ce) {
        for (size_t c = cb; c < ce; ++c) {
            SumMax sm;
            const size_t e = std::min(n, (c + 1) * chunk);
            for (size_t i = c * chunk; i < e; ++i) {
                const double d = tree.nearest_l1(from[i]).distance;
                sm.sum += d;
                sm.max = std::max(sm.max, d);
            }
            parts[c] = sm;
        }
    }, 1);
    SumMax total;
    for (const SumMax& p : parts) {
        total.sum += p.sum;
        total.max = std::max(total.max, p.max);
    }
    return total;
}

} // namespace

double chamfer(const std::vector<Vec3>& from, const std::vector<Vec3>& to)
{
    if (from.empty() || to.empty()) throw EmptyPointSet("chamfer distance of an empty set");
    const KdTree tree(to);
    return nearest_stats(from, tree).sum / static_cast<double>(from.size());
}

double hausdorff(const std::vector<Vec3>& from, const std::vector<Vec3>& to)
{
    if (from.empty() || to.empty()) throw EmptyPointSet("hausdorff distance of an empty set");
    const KdTree tree(to);
    return nearest_stats(from, tree).max;
}

PairMetrics metrics_between(const std::vector<Vec3>& sim, const std::vector<Vec3>& real)
{
    if (sim.empty() || real.empty()) throw EmptyPointSet("metrics over an empty point set");
    const KdTree sim_tree(sim);
    const KdTree real_tree(real);
    const SumMax s2r = nearest_stats(sim, real_tree);
    const SumMax r2s = nearest_stats(real, sim_tree);
    PairMetrics m;
    m.cd_s2r = s2r.sum / static_cast<double>(sim.size());
    m.cd_r2s = r2s.sum / static_cast<double>(real.size());
    m.hd_s2r = s2r.max;
    m.hd_r2s = r2s.max;
    return m;
}

} // namespace gdyn
