#pragma once

#include "gdyn/core/types.hpp"

#include <vector>

namespace gdyn {

/// Mean L1 nearest-neighbor distance from each point of `from` to `to`.
double chamfer(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

/// Max L1 nearest-neighbor distance (unidirectional worst case).
double hausdorff(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

struct PairMetrics {
    double cd_s2r = 0.0;
    double cd_r2s = 0.0;
    double hd_s2r = 0.0;
    double hd_r2s = 0.0;
};

/// All four directional metrics between simulated vertices and a real cloud,
/// sharing one kd-tree per side.
PairMetrics metrics_between(const std::vector<Vec3>& sim, const std::vector<Vec3>& real);

} // namespace gdyn
