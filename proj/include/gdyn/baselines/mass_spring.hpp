#pragma once

#include "gdyn/assets/mesh.hpp"
#include "gdyn/core/types.hpp"
#include "gdyn/solver/implicit.hpp" // SimState, AnchorTarget

#include <vector>

namespace gdyn {

enum class SpringKind { Structural, Shear, Bending };

struct Spring {
    int i, j;
    double rest;     // m
    double ks;       // kg/s^2
    double kd;       // kg/s
    SpringKind kind;
};

struct SpringNetwork {
    std::vector<Spring> springs;

    /// Structural springs on mesh edges, shear springs across each interior
    /// hinge (the opposite quad diagonal on grid meshes), bending springs
    /// between near-collinear second neighbors.
    static SpringNetwork from_mesh(const TriangleMesh& mesh, double ks, double kd);
};

/// Hooke force on particle i with projected damping; force on j is the
/// negative. Stretched springs pull i toward j.
Vec3 spring_force(const Spring& s, const Vec3& xi, const Vec3& xj, const Vec3& vi, const Vec3& vj,
                  bool* degenerate = nullptr);

/// Explicit integrator (symplectic Euler; optional forward Euler shows the
/// instability of the naive scheme).
class MassSpringSolver {
public:
    MassSpringSolver(SpringNetwork network, std::vector<double> mass);

    void step(SimState& state, double h, const Vec3& gravity,
              const std::vector<AnchorTarget>& anchors, bool forward_euler = false);

    int degenerate_springs() const { return degenerate_count_; }
    const SpringNetwork& network() const { return network_; }

    /// Time-step bound from the stiffest spring (h_max ~ 2/omega_max).
    double stable_step_estimate() const;

private:
    SpringNetwork network_;
    std::vector<double> mass_;
    // per-vertex incident springs, fixed order, for deterministic gather
    std::vector<int> incidence_ptr_;
    std::vector<int> incidence_;
    int degenerate_count_ = 0;
};

} // namespace gdyn
