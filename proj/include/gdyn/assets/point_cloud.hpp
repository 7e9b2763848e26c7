#pragma once

#include "gdyn/core/types.hpp"

#include <string>
#include <vector>

namespace gdyn {

struct PointCloudFrame {
    std::vector<Vec3> points;
    double timestamp = 0.0; // s
};

/// Loads an ascii PLY or XYZ cloud (by extension). Binary PLY is rejected.
PointCloudFrame load_point_cloud(const std::string& path);
void save_point_cloud(const PointCloudFrame& cloud, const std::string& path);

/// A stream is a JSON manifest [{"time": t, "path": "frame.xyz"}, ...] with
/// strictly increasing timestamps; paths are relative to the manifest.
std::vector<PointCloudFrame> load_cloud_stream(const std::string& manifest_path);
void save_cloud_stream(const std::vector<PointCloudFrame>& frames, const std::string& dir,
                       const std::string& manifest_name = "stream.json");

} // namespace gdyn
