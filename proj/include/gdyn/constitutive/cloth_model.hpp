#pragma once

#include "gdyn/assets/material.hpp"
#include "gdyn/assets/mesh.hpp"
#include "gdyn/core/bcsr.hpp"
#include "gdyn/core/types.hpp"

#include <atomic>
#include <vector>

namespace gdyn {

/// Per-triangle in-plane deformation snapshot. u/w are the warp/weft unit
/// axes of the rest frame, so all three measures vanish at rest.
struct ElementStretchState {
    int triangle = -1;
    Eigen::Matrix<double, 3, 2> deformation; // world per rest
    double c_warp = 0.0;                     // |F u| - 1
    double c_weft = 0.0;                     // |F w| - 1
    double c_shear = 0.0;                    // (F u) . (F w)
};

struct HingeState {
    int v[4] = {-1, -1, -1, -1}; // edge v0-v1, opposite v2 (tri A), v3 (tri B)
    double theta = 0.0;          // dihedral angle, (-pi, pi)
    double rest_angle = 0.0;
    double curvature = 0.0;      // theta * edge_length / area scale, 1/m
};

/// Precomputed stretch element: rest area and the linear maps taking vertex
/// positions to the deformed warp/weft axes.
struct StretchElement {
    int v[3];
    double area;
    double su[3]; // F u = sum su[k] x_k
    double sw[3]; // F w = sum sw[k] x_k
};

struct HingeElement {
    int v[4];
    double rest_angle;
    double rest_len;  // L_e
    double scale;     // L_e^2 / (A1 + A2)
    double k_lin;     // direction-weighted linear bending stiffness
    double k_quad;    // quadratic bending resistance coefficient
};

/// Scratch output of the per-element kernels; the assembler scatters these.
struct StretchScratch {
    Vec3 grad[3];
    Mat3 hess[6]; // upper blocks (0,0),(0,1),(0,2),(1,1),(1,2),(2,2)
};

struct HingeScratch {
    Vec3 grad[4];      // dE/dx_k
    Vec3 theta_grad[4];
    double weight;     // d2E/dtheta2 (>= 0); hessian block = w * g_i g_j^T
};

/// Elastic energy E(x) of a garment: anisotropic stretch/shear per triangle
/// plus dihedral bending whose resistance is quadratic in curvature. All
/// Hessian contributions are projected to PSD element-by-element.
class ClothModel {
public:
    ClothModel(const TriangleMesh& mesh, const Material& material);

    const TriangleMesh& mesh() const { return *mesh_; }
    const Material& material() const { return material_; }
    int vertex_count() const { return n_vertices_; }

    const std::vector<StretchElement>& stretch_elements() const { return stretch_; }
    const std::vector<HingeElement>& hinges() const { return hinges_; }

    double stretch_energy(const VecX& x) const;
    double bending_energy(const VecX& x) const;
    double gravity_energy(const VecX& x, const Vec3& gravity) const;
    double elastic_energy(const VecX& x) const { return stretch_energy(x) + bending_energy(x); }
    double total_energy(const VecX& x, const Vec3& gravity) const
    {
        return elastic_energy(x) + gravity_energy(x, gravity);
    }

    void add_stretch_gradient(const VecX& x, VecX& grad) const;
    void add_bending_gradient(const VecX& x, VecX& grad) const;
    void add_gravity_gradient(VecX& grad, const Vec3& gravity) const;
    void add_total_gradient(const VecX& x, VecX& grad, const Vec3& gravity) const;

    /// Element kernels used by the system assembler (parallel-safe).
    void eval_stretch(const VecX& x, int t, StretchScratch& out) const;
    void eval_hinge(const VecX& x, int h, HingeScratch& out) const;

    /// Elastic Hessian assembled on the mesh sparsity alone (test/oracle path).
    Bcsr3 elastic_hessian(const VecX& x) const;

    ElementStretchState stretch_state(const VecX& x, int t) const;
    HingeState hinge_state(const VecX& x, int h) const;

    /// Count of clamped near-degenerate evaluations since construction.
    int degenerate_events() const { return degenerate_events_.load(); }

private:
    const TriangleMesh* mesh_;
    Material material_;
    int n_vertices_;
    std::vector<StretchElement> stretch_;
    std::vector<HingeElement> hinges_;
    mutable std::atomic<int> degenerate_events_{0};
};

} // namespace gdyn
