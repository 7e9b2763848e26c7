#pragma once

#include "gdyn/assets/point_cloud.hpp"
#include "gdyn/core/types.hpp"
#include "gdyn/metrics/icp.hpp"

#include <string>
#include <vector>

namespace gdyn {

struct MeshFrame {
    double time = 0.0;
    std::vector<Vec3> vertices;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
};

struct MetricReport {
    std::vector<double> time;
    std::vector<double> cd_s2r, cd_r2s, hd_s2r, hd_r2s;

    int frame_count() const { return static_cast<int>(time.size()); }
    MetricSummary summarize(const std::vector<double>& series) const;

    /// One row per matched frame: frame,time,cd_s2r,cd_r2s,hd_s2r,hd_r2s.
    std::string to_csv() const;
    /// Per-metric mean/std/max plus frame count.
    std::string summary_json() const;
};

/// Shift every frame's timestamp by -delay and drop frames that fall before
/// time zero.
std::vector<PointCloudFrame> compensate_delay(const std::vector<PointCloudFrame>& frames,
                                              double delay);

/// Pairs sim frames with the nearest real frame (within half the sim frame
/// period), applies the rigid alignment to sim vertices, and computes all
/// four metrics per matched frame. Throws NoOverlap when nothing matches.
MetricReport evaluate(const std::vector<MeshFrame>& sim, const std::vector<PointCloudFrame>& real,
                      const RigidTransform& alignment, double delay);

} // namespace gdyn
