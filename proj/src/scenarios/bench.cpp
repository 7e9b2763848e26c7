#include "gdyn/scenarios/bench.hpp"

#include "gdyn/baselines/mass_spring.hpp"
#include "gdyn/baselines/pbd.hpp"
#include "gdyn/constitutive/cloth_model.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace gdyn {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}
} // namespace

std::vector<TimingRecord> timing_benchmark(const std::vector<int>& vertex_counts,
                                           SolverChoice solver, const Material& material,
                                           const SolverConfig& fem_config, int measured_steps,
                                           int settle_steps)
{
    std::vector<TimingRecord> records;
    for (int count : vertex_counts) {
        const int n = std::max(2, static_cast<int>(std::lround(std::sqrt(double(count)))));
        TimingRecord rec;
        rec.vertex_count = n * n;

        const auto t_init = Clock::now();
        TriangleMesh mesh = make_grid(n, n, 0.5, 0.5);
        assign_material(mesh, material);
        const std::vector<AnchorTarget> anchors = {
            {0, mesh.positions[0]}, {n - 1, mesh.positions[n - 1]}};
        const Vec3 gravity(0, 0, -9.81);

        if (solver == SolverChoice::FemImplicit) {
            ClothModel model(mesh, material);
            ImplicitSolver fem(model, fem_config);
            SimState state = SimState::from_mesh(mesh);
            rec.step_dt = fem_config.h;
            rec.init_time_s = seconds_since(t_init);
            for (int s = 0; s < settle_steps; ++s) fem.step(state, anchors, {}, {}, gravity);
            const auto t_run = Clock::now();
            for (int s = 0; s < measured_steps; ++s) fem.step(state, anchors, {}, {}, gravity);
            rec.mean_step_time_s = seconds_since(t_run) / measured_steps;
        } else if (solver == SolverChoice::MassSpring) {
            SpringNetwork net = SpringNetwork::from_mesh(mesh, material.stretch_warp,
                                                         material.damping * material.area_density);
            MassSpringSolver ms(net, mesh.vertex_mass);
            SimState state = SimState::from_mesh(mesh);
            const double h = 0.5 * ms.stable_step_estimate();
            rec.step_dt = h;
            rec.init_time_s = seconds_since(t_init);
            for (int s = 0; s < settle_steps; ++s) ms.step(state, h, gravity, anchors);
            const auto t_run = Clock::now();
            for (int s = 0; s < measured_steps; ++s) ms.step(state, h, gravity, anchors);
            rec.mean_step_time_s = seconds_since(t_run) / measured_steps;
        } else {
            PbdSolver pbd(mesh, mesh.vertex_mass, 10);
            SimState state = SimState::from_mesh(mesh);
            rec.step_dt = fem_config.h;
            rec.init_time_s = seconds_since(t_init);
            for (int s = 0; s < settle_steps; ++s)
                pbd.step(state, fem_config.h, gravity, anchors);
            const auto t_run = Clock::now();
            for (int s = 0; s < measured_steps; ++s)
                pbd.step(state, fem_config.h, gravity, anchors);
            rec.mean_step_time_s = seconds_since(t_run) / measured_steps;
        }
        records.push_back(rec);
    }
    return records;
}

std::string timing_csv(const std::vector<TimingRecord>& records)
{
    std::string out = "vertex_count,init_time_s,mean_step_time_s,step_dt\n";
    char buf[160];
    for (const TimingRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.6g,%.6g,%.6g\n", r.vertex_count, r.init_time_s,
                      r.mean_step_time_s, r.step_dt);
        out += buf;
    }
    return out;
}

} // namespace gdyn
