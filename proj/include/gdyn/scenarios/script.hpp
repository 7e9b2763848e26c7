#pragma once

#include "gdyn/assets/mesh.hpp"
#include "gdyn/core/types.hpp"
#include "gdyn/metrics/icp.hpp" // RigidTransform

#include <limits>
#include <string>
#include <vector>

namespace gdyn {

struct Keyframe {
    double time = 0.0;
    Vec3 position = Vec3::Zero();
};

struct AnchorTrajectory {
    Vec3 grasp_point = Vec3::Zero(); // gripper position; mapped to the nearest vertex
    std::vector<Keyframe> keyframes; // strictly increasing times
    double release_time = std::numeric_limits<double>::infinity();

    Vec3 position_at(double t) const; // linear interpolation, clamped ends
    bool active_at(double t) const { return t < release_time; }
};

struct ScenarioScript {
    std::string name = "scenario";
    RigidTransform initial_pose = RigidTransform::from_translation(Vec3(0.1, 0.0, 0.01));
    std::vector<AnchorTrajectory> targets;
    double duration = 0.0;
    double table_height = 0.0;
    bool table_enabled = true;
    Vec3 gravity{0.0, 0.0, -9.81};

    void validate() const;
    std::string to_json() const;
    static ScenarioScript from_json_text(const std::string& text);
    static ScenarioScript load(const std::string& path);
    void save(const std::string& path) const;
};

/// Index of the garment vertex closest to the gripper point (Euclidean; ties
/// go to the lowest index).
int select_grasp_vertex(const std::vector<Vec3>& positions, const Vec3& gripper);

struct GraspParams {
    double height = 0.3; // m
    double lift_time = 2.0;
    double settle_time = 1.0;
};
struct FlingParams {
    double lift_height = 0.3;
    double lift_time = 1.0;
    double stroke = 0.4;      // m forward then back
    double stroke_time = 0.5; // total forward+back
    double settle_time = 0.5;
};
struct FoldParams {
    double lift_height = 0.05;
    double lift_time = 0.5;
    double travel_time = 1.0;
    double settle_time = 1.2;
};

/// Scenario builders. Default grasp points are the two vertices nearest the
/// near-edge corners (min x) of the posed mesh's bounding rectangle; fold
/// carries them to the far (bottom) edge and releases.
ScenarioScript make_grasp(const TriangleMesh& mesh, const RigidTransform& pose,
                          const GraspParams& params, std::vector<Vec3> grasp_points = {});
ScenarioScript make_fling(const TriangleMesh& mesh, const RigidTransform& pose,
                          const FlingParams& params, std::vector<Vec3> grasp_points = {});
ScenarioScript make_fold(const TriangleMesh& mesh, const RigidTransform& pose,
                         const FoldParams& params, std::vector<Vec3> grasp_points = {});

} // namespace gdyn
