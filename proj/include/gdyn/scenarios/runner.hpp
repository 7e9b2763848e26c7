#pragma once

#include "gdyn/assets/material.hpp"
#include "gdyn/assets/mesh.hpp"
#include "gdyn/metrics/report.hpp" // MeshFrame
#include "gdyn/scenarios/script.hpp"
#include "gdyn/solver/implicit.hpp"

#include <string>
#include <vector>

namespace gdyn {

enum class SolverChoice { FemImplicit, MassSpring, Pbd };

SolverChoice solver_choice_from_name(const std::string& name);
std::string solver_choice_name(SolverChoice choice);

struct RunnerConfig {
    SolverChoice solver = SolverChoice::FemImplicit;
    SolverConfig fem;
    double frame_rate = 30.0;
    bool self_collision = true;

    double contact_stiffness = 0.0; // 0: default = stretch_warp
    double contact_radius = 0.0;    // 0: default = 2x thickness

    double mass_spring_dt = 0.0; // 0: auto from the stability estimate
    bool forward_euler = false;
    int pbd_iterations = 10;
};

struct Trajectory {
    std::vector<Tri> triangles;
    std::vector<MeshFrame> frames;

    /// Binary frame pack: 8-byte magic, frame count, vertex count, then per
    /// frame one double timestamp followed by 3N packed doubles.
    void save_framepack(const std::string& path) const;
    static Trajectory load_framepack(const std::string& path);
    void save_obj_frames(const std::string& dir) const;
};

struct RunDiagnostics {
    long newton_total = 0;
    long pcg_total = 0;
    int stall_count = 0;
    int untangle_corrections = 0;
    int untangle_frames = 0;
    int deep_penetration_frames_before = 0; // frames with any gap < -thickness pre-untangle
    int deep_penetration_frames_after = 0;
    int steps = 0;
    bool untangle_failed = false;
    bool numerical_failure = false;
    std::string message;

    std::string to_json() const;
};

struct RunResult {
    Trajectory trajectory;
    RunDiagnostics diagnostics;
    SimState final_state;
    bool aborted = false;
};

RunResult run_scenario(const TriangleMesh& mesh, const Material& material,
                       const ScenarioScript& script, const RunnerConfig& config);

} // namespace gdyn
