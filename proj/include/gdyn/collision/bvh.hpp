#pragma once

#include "gdyn/core/types.hpp"

#include <utility>
#include <vector>

namespace gdyn {

struct Aabb {
    Vec3 lo{0, 0, 0};
    Vec3 hi{0, 0, 0};

    static Aabb of_point(const Vec3& p) { return {p, p}; }
    void grow(const Vec3& p)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void grow(const Aabb& o)
    {
        lo = lo.cwiseMin(o.lo);
        hi = hi.cwiseMax(o.hi);
    }
    void inflate(double r)
    {
        lo.array() -= r;
        hi.array() += r;
    }
    bool overlaps(const Aabb& o) const
    {
        return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
    }
};

/// Binary AABB tree built by median split on the longest centroid axis.
/// Leaf boxes are the primitive boxes inflated by the contact radius, so the
/// candidate pair set equals the exact inflated-box overlap set.
class Bvh {
public:
    Bvh() = default;

    void build(const std::vector<Aabb>& prim_boxes, double inflation);

    /// Updates boxes bottom-up; the tree topology is preserved.
    void refit(const std::vector<Aabb>& prim_boxes);

    int primitive_count() const { return n_prims_; }
    bool empty() const { return n_prims_ == 0; }
    double inflation() const { return inflation_; }

    /// Primitive indices whose inflated box overlaps the query box.
    void query(const Aabb& box, std::vector<int>& out) const;

    /// All primitive pairs (i < j) with overlapping inflated boxes.
    std::vector<std::pair<int, int>> self_pairs() const;

    /// Overlapping primitive pairs (i from a, j from b) between two trees.
    static std::vector<std::pair<int, int>> tree_pairs(const Bvh& a, const Bvh& b);

private:
    struct Node {
        Aabb box;
        int left = -1;
        int right = -1;
        int prim = -1; // leaf when >= 0
    };

    int build_range(std::vector<int>& order, const std::vector<Aabb>& boxes, int begin, int end);

    std::vector<Node> nodes_;
    int root_ = -1;
    int n_prims_ = 0;
    double inflation_ = 0.0;
};

} // namespace gdyn
