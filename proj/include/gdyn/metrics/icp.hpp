#pragma once

#include "gdyn/core/types.hpp"

#include <vector>

namespace gdyn {

struct RigidTransform {
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    RigidTransform inverse() const
    {
        RigidTransform inv;
        inv.rotation = rotation.conjugate();
        inv.translation = -(inv.rotation * translation);
        return inv;
    }
    static RigidTransform from_translation(const Vec3& t)
    {
        RigidTransform r;
        r.translation = t;
        return r;
    }
};

struct IcpResult {
    RigidTransform transform; // maps source onto target
    double rms = 0.0;
    int iterations = 0;
};

/// Point-to-point ICP: nearest neighbors, cross-covariance, best rotation by
/// orthogonal Procrustes, centroid translation. Iterates until the RMS change
/// drops below tol or max_iters.
IcpResult icp_align(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                    int max_iters = 50, double tol = 1e-10);

} // namespace gdyn
