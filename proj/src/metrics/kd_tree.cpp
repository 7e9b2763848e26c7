#include "gdyn/metrics/kd_tree.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gdyn {

namespace {
constexpr int kLeafSize = 16;

double box_gap_l1(const Vec3& q, const Vec3& lo, const Vec3& hi)
{
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
        if (q[a] < lo[a]) d += lo[a] - q[a];
        else if (q[a] > hi[a]) d += q[a] - hi[a];
    }
    return d;
}

double box_gap_l2(const Vec3& q, const Vec3& lo, const Vec3& hi)
{
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        double g = 0.0;
        if (q[a] < lo[a]) g = lo[a] - q[a];
        else if (q[a] > hi[a]) g = q[a] - hi[a];
        d2 += g * g;
    }
    return std::sqrt(d2);
}
} // namespace

KdTree::KdTree(const std::vector<Vec3>& points) : n_(static_cast<int>(points.size()))
{
    if (points.empty()) throw EmptyPointSet("kd-tree over an empty point set");
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    nodes_.reserve(2 * size_t(n_) / kLeafSize + 2);
    xs_.resize(n_);
    ys_.resize(n_);
    zs_.resize(n_);
    index_.resize(n_);
    root_ = build(0, n_, order, points);
    for (int k = 0; k < n_; ++k) {
        const Vec3& p = points[order[k]];
        xs_[k] = p.x();
        ys_[k] = p.y();
        zs_[k] = p.z();
        index_[k] = order[k];
    }
}

int KdTree::build(int begin, int end, std::vector<int>& order, const std::vector<Vec3>& pts)
{
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Vec3 lo = pts[order[begin]], hi = pts[order[begin]];
    for (int k = begin + 1; k < end; ++k) {
        lo = lo.cwiseMin(pts[order[k]]);
        hi = hi.cwiseMax(pts[order[k]]);
    }
    Node& n = nodes_[node_id];
    n.lo = lo;
    n.hi = hi;
    if (end - begin <= kLeafSize) {
        n.begin = begin;
        n.end = end;
        return node_id;
    }
    int axis = 0;
    const Vec3 ext = hi - lo;
    if (ext.y() > ext.x()) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                         return pts[a][axis] < pts[b][axis] || (pts[a][axis] == pts[b][axis] && a < b);
                     });
    const int l = build(begin, mid, order, pts);
    const int r = build(mid, end, order, pts);
    nodes_[node_id].left = l;
    nodes_[node_id].right = r;
    return node_id;
}

template <bool L1>
void KdTree::search(int node_id, const Vec3& q, Result& best) const
{
    const Node& n = nodes_[node_id];
    if (n.left < 0) {
        if constexpr (L1) {
            double dist;
            const size_t count = size_t(n.end - n.begin);
            const size_t local = kernels().l1_nearest(xs_.data() + n.begin, ys_.data() + n.begin,
                                                      zs_.data() + n.begin, count, q.x(), q.y(),
                                                      q.z(), &dist);
            if (dist < best.distance) {
                best.distance = dist;
                best.index = index_[n.begin + static_cast<int>(local)];
            }
        } else {
            for (int k = n.begin; k < n.end; ++k) {
                const double dx = xs_[k] - q.x(), dy = ys_[k] - q.y(), dz = zs_[k] - q.z();
                const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (d < best.distance) {
                    best.distance = d;
                    best.index = index_[k];
                }
            }
        }
        return;
    }
    const Node& a = nodes_[n.left];
    const Node& b = nodes_[n.right];
    const double ga = L1 ? box_gap_l1(q, a.lo, a.hi) : box_gap_l2(q, a.lo, a.hi);
    const double gb = L1 ? box_gap_l1(q, b.lo, b.hi) : box_gap_l2(q, b.lo, b.hi);
    const int first = ga <= gb ? n.left : n.right;
    const int second = ga <= gb ? n.right : n.left;
    const double gap_first = std::min(ga, gb);
    const double gap_second = std::max(ga, gb);
    if (gap_first < best.distance) search<L1>(first, q, best);
    if (gap_second < best.distance) search<L1>(second, q, best);
}

KdTree::Result KdTree::nearest_l1(const Vec3& q) const
{
    Result best;
    best.distance = std::numeric_limits<double>::infinity();
    search<true>(root_, q, best);
    return best;
}

KdTree::Result KdTree::nearest_l2(const Vec3& q) const
{
    Result best;
    best.distance = std::numeric_limits<double>::infinity();
    search<false>(root_, q, best);
    return best;
}

} // namespace gdyn
