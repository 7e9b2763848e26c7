#pragma once

#include "gdyn/core/types.hpp"

#include <vector>

namespace gdyn {

/// kd-tree over points with exact nearest-neighbor queries in the L1 and L2
/// metrics (box lower bounds are valid for both). Leaves store points in SoA
/// form so the scan runs through the SIMD kernel.
class KdTree {
public:
    explicit KdTree(const std::vector<Vec3>& points); // EmptyPointSet if empty

    struct Result {
        int index = -1;
        double distance = 0.0;
    };

    Result nearest_l1(const Vec3& q) const;
    Result nearest_l2(const Vec3& q) const;

    int size() const { return n_; }

private:
    struct Node {
        Vec3 lo, hi;   // bounding box
        int left = -1; // internal when >= 0
        int right = -1;
        int begin = 0, end = 0; // leaf point range
    };

    int build(int begin, int end, std::vector<int>& order, const std::vector<Vec3>& pts);
    template <bool L1>
    void search(int node, const Vec3& q, Result& best) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    int n_ = 0;
    std::vector<double> xs_, ys_, zs_;
    std::vector<int> index_;
};

} // namespace gdyn
