#include "gdyn/scenarios/runner.hpp"

#include "gdyn/baselines/mass_spring.hpp"
#include "gdyn/baselines/pbd.hpp"
#include "gdyn/collision/contact.hpp"
#include "gdyn/constitutive/cloth_model.hpp"
#include "gdyn/core/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace gdyn {

SolverChoice solver_choice_from_name(const std::string& name)
{
    if (name == "fem" || name == "fem-implicit") return SolverChoice::FemImplicit;
    if (name == "mass-spring") return SolverChoice::MassSpring;
    if (name == "pbd") return SolverChoice::Pbd;
    throw std::invalid_argument("unknown solver: " + name);
}

std::string solver_choice_name(SolverChoice choice)
{
    switch (choice) {
    case SolverChoice::FemImplicit: return "fem";
    case SolverChoice::MassSpring: return "mass-spring";
    case SolverChoice::Pbd: return "pbd";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Trajectory io

namespace {
constexpr char kMagic[8] = {'G', 'D', 'Y', 'N', 'P', 'A', 'K', '1'};
}

void Trajectory::save_framepack(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedAsset("cannot write frame pack: " + path);
    out.write(kMagic, 8);
    const uint64_t nframes = frames.size();
    const uint64_t nverts = frames.empty() ? 0 : frames[0].vertices.size();
    out.write(reinterpret_cast<const char*>(&nframes), 8);
    out.write(reinterpret_cast<const char*>(&nverts), 8);
    for (const MeshFrame& f : frames) {
        out.write(reinterpret_cast<const char*>(&f.time), 8);
        for (const Vec3& p : f.vertices)
            out.write(reinterpret_cast<const char*>(p.data()), 24);
    }
}

Trajectory Trajectory::load_framepack(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedAsset("cannot open frame pack: " + path);
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw MalformedAsset("not a frame pack: " + path);
    uint64_t nframes = 0, nverts = 0;
    in.read(reinterpret_cast<char*>(&nframes), 8);
    in.read(reinterpret_cast<char*>(&nverts), 8);
    Trajectory traj;
    traj.frames.resize(nframes);
    for (uint64_t f = 0; f < nframes; ++f) {
        MeshFrame& frame = traj.frames[f];
        in.read(reinterpret_cast<char*>(&frame.time), 8);
        frame.vertices.resize(nverts);
        for (uint64_t v = 0; v < nverts; ++v)
            in.read(reinterpret_cast<char*>(frame.vertices[v].data()), 24);
        if (!in) throw MalformedAsset("truncated frame pack: " + path);
    }
    return traj;
}

void Trajectory::save_obj_frames(const std::string& dir) const
{
    std::filesystem::create_directories(dir);
    char name[64];
    for (size_t f = 0; f < frames.size(); ++f) {
        std::snprintf(name, sizeof(name), "frame_%05zu.obj", f);
        save_obj(frames[f].vertices, triangles, (std::filesystem::path(dir) / name).string());
    }
}

std::string RunDiagnostics::to_json() const
{
    nlohmann::json j{{"newton_total", newton_total},
                     {"pcg_total", pcg_total},
                     {"stall_count", stall_count},
                     {"untangle_corrections", untangle_corrections},
                     {"untangle_frames", untangle_frames},
                     {"deep_penetration_frames_before", deep_penetration_frames_before},
                     {"deep_penetration_frames_after", deep_penetration_frames_after},
                     {"steps", steps},
                     {"untangle_failed", untangle_failed},
                     {"numerical_failure", numerical_failure},
                     {"message", message}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// run_scenario

namespace {

struct AnchorSchedule {
    std::vector<int> vertices;              // scripted grasp vertices
    std::vector<const AnchorTrajectory*> trajs;
    std::vector<int> asset_anchored;        // anchored flags from the asset
    std::vector<Vec3> asset_positions;

    std::vector<AnchorTarget> at(double t) const
    {
        std::vector<AnchorTarget> anchors;
        for (size_t k = 0; k < vertices.size(); ++k)
            if (trajs[k]->active_at(t)) anchors.push_back({vertices[k], trajs[k]->position_at(t)});
        for (size_t k = 0; k < asset_anchored.size(); ++k)
            anchors.push_back({asset_anchored[k], asset_positions[k]});
        return anchors;
    }
};

void clamp_to_table(SimState& state, double table_z, double offset)
{
    const int n = static_cast<int>(state.x.size() / 3);
    for (int v = 0; v < n; ++v) {
        double& z = state.x[3 * v + 2];
        if (z < table_z + offset) {
            z = table_z + offset;
            double& vz = state.v[3 * v + 2];
            if (vz < 0) vz = 0;
        }
    }
}

} // namespace

RunResult run_scenario(const TriangleMesh& input_mesh, const Material& material,
                       const ScenarioScript& script, const RunnerConfig& config)
{
    script.validate();
    TriangleMesh mesh = input_mesh;
    for (size_t v = 0; v < mesh.positions.size(); ++v)
        mesh.positions[v] = script.initial_pose.apply(mesh.positions[v]);
    assign_material(mesh, material);

    AnchorSchedule schedule;
    for (const AnchorTrajectory& t : script.targets) {
        schedule.vertices.push_back(select_grasp_vertex(mesh.positions, t.grasp_point));
        schedule.trajs.push_back(&t);
    }
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.anchored[v]) {
            schedule.asset_anchored.push_back(v);
            schedule.asset_positions.push_back(mesh.positions[v]);
        }
    }

    RunResult result;
    result.trajectory.triangles = mesh.triangles;

    const double thickness = material.thickness;
    CollisionParams cparams;
    cparams.thickness = thickness;
    cparams.contact_radius = config.contact_radius > 0 ? config.contact_radius : 2.0 * thickness;
    cparams.friction = material.friction_coeff;
    ContactForce cf;
    cf.stiffness = config.contact_stiffness > 0 ? config.contact_stiffness : material.stretch_warp;
    cf.activation = cparams.contact_radius;
    const double gather_radius = cparams.contact_radius + thickness;

    Environment env;
    if (script.table_enabled)
        env.half_spaces.push_back({Vec3(0, 0, 1), script.table_height});
    env.friction = material.friction_coeff;

    SimState state = SimState::from_mesh(mesh);
    const double frame_dt = 1.0 / config.frame_rate;

    auto emit_frame = [&](double t) {
        MeshFrame frame;
        frame.time = t;
        frame.vertices = unflatten(state.x);
        result.trajectory.frames.push_back(std::move(frame));
    };
    emit_frame(0.0);

    try {
        if (config.solver == SolverChoice::FemImplicit) {
            ClothModel model(mesh, material);
            ImplicitSolver solver(model, config.fem);
            CollisionWorld world(mesh, cparams);
            const double h = config.fem.h;
            const int steps = static_cast<int>(std::llround(script.duration / h));
            const int steps_per_frame = std::max(1, static_cast<int>(std::llround(frame_dt / h)));

            for (int s = 0; s < steps; ++s) {
                const double t_next = (s + 1) * h;
                std::vector<ContactConstraint> contacts;
                std::vector<Vec3> positions = unflatten(state.x);
                if (config.self_collision || !env.half_spaces.empty() || !env.spheres.empty()) {
                    world.update(positions);
                    if (config.self_collision) contacts = world.detect(positions, gather_radius);
                    auto env_contacts = world.detect_environment(positions, env, gather_radius);
                    contacts.insert(contacts.end(), env_contacts.begin(), env_contacts.end());
                }
                const StepStats stats =
                    solver.step(state, schedule.at(t_next), contacts, cf, script.gravity);
                result.diagnostics.newton_total += stats.newton_iterations;
                result.diagnostics.pcg_total += stats.pcg_iterations;
                if (stats.stalled) ++result.diagnostics.stall_count;
                ++result.diagnostics.steps;

                if (config.self_collision) {
                    positions = unflatten(state.x);
                    world.update(positions);
                    bool deep = false, trigger = false;
                    for (const ContactConstraint& c : world.detect(positions)) {
                        const double gap = c.eval_gap(positions, thickness);
                        if (gap < -thickness) deep = true;
                        if (gap < -0.5 * thickness) trigger = true;
                    }
                    if (deep) ++result.diagnostics.deep_penetration_frames_before;
                    if (trigger) {
                        try {
                            const UntangleResult ur =
                                untangle(world, positions, mesh.vertex_mass, mesh.anchored);
                            result.diagnostics.untangle_corrections += ur.resolved;
                            ++result.diagnostics.untangle_frames;
                            state.x = flatten(positions);
                        } catch (const UntangleFailed&) {
                            result.diagnostics.untangle_failed = true;
                        }
                        bool still_deep = false;
                        world.update(positions);
                        for (const ContactConstraint& c : world.detect(positions))
                            if (c.eval_gap(positions, thickness) < -thickness) still_deep = true;
                        if (still_deep) ++result.diagnostics.deep_penetration_frames_after;
                    }
                }
                if ((s + 1) % steps_per_frame == 0) emit_frame(t_next);
            }
        } else if (config.solver == SolverChoice::MassSpring) {
            SpringNetwork net =
                SpringNetwork::from_mesh(mesh, material.stretch_warp,
                                         material.damping * material.area_density);
            MassSpringSolver solver(net, mesh.vertex_mass);
            double h = config.mass_spring_dt > 0 ? config.mass_spring_dt
                                                 : 0.5 * solver.stable_step_estimate();
            const long steps = std::llround(script.duration / h);
            const long steps_per_frame = std::max<long>(1, std::llround(frame_dt / h));
            for (long s = 0; s < steps; ++s) {
                const double t_next = (s + 1) * h;
                solver.step(state, h, script.gravity, schedule.at(t_next), config.forward_euler);
                if (script.table_enabled)
                    clamp_to_table(state, script.table_height, 0.5 * thickness);
                ++result.diagnostics.steps;
                if ((s + 1) % steps_per_frame == 0) emit_frame(t_next);
            }
        } else {
            PbdSolver solver(mesh, mesh.vertex_mass, config.pbd_iterations);
            const double h = config.fem.h;
            const int steps = static_cast<int>(std::llround(script.duration / h));
            const int steps_per_frame = std::max(1, static_cast<int>(std::llround(frame_dt / h)));
            for (int s = 0; s < steps; ++s) {
                const double t_next = (s + 1) * h;
                solver.step(state, h, script.gravity, schedule.at(t_next));
                if (script.table_enabled)
                    clamp_to_table(state, script.table_height, 0.5 * thickness);
                ++result.diagnostics.steps;
                if ((s + 1) % steps_per_frame == 0) emit_frame(t_next);
            }
        }
    } catch (const NumericalFailure& e) {
        result.diagnostics.numerical_failure = true;
        result.diagnostics.message = e.what();
        result.aborted = true;
    }
    result.final_state = state;
    return result;
}

} // namespace gdyn
