#pragma once

#include "gdyn/assets/material.hpp"
#include "gdyn/scenarios/runner.hpp"

#include <string>
#include <vector>

namespace gdyn {

struct TimingRecord {
    int vertex_count = 0;
    double init_time_s = 0.0;
    double mean_step_time_s = 0.0; // over the measured steps, post settling
    double step_dt = 0.0;          // simulated seconds per step
};

/// Builds a square hanging cloth near each requested vertex count (two pinned
/// corners, gravity, no self-collision), runs settle_steps to reach a stable
/// state, then averages the wall-clock cost of exactly measured_steps steps.
std::vector<TimingRecord> timing_benchmark(const std::vector<int>& vertex_counts,
                                           SolverChoice solver, const Material& material,
                                           const SolverConfig& fem_config = {},
                                           int measured_steps = 100, int settle_steps = 20);

std::string timing_csv(const std::vector<TimingRecord>& records);

} // namespace gdyn
