#pragma once

#include "gdyn/collision/contact.hpp"
#include "gdyn/constitutive/cloth_model.hpp"
#include "gdyn/core/bcsr.hpp"
#include "gdyn/core/types.hpp"
#include "gdyn/solver/mas.hpp"

#include <vector>

namespace gdyn {

struct SimState {
    VecX x; // 3N positions, m
    VecX v; // 3N velocities, m/s
    double t = 0.0;

    static SimState from_mesh(const TriangleMesh& mesh);
};

struct SolverConfig {
    double h = 1.0 / 60.0;
    int newton_iters = 4;
    int pcg_iters = 50;
    double pcg_tol = 1e-4;
    int mas_levels = 3;
    int mas_block_size = 32;

    void validate() const;
};

struct AnchorTarget {
    int vertex;
    Vec3 position;
};

struct StepStats {
    int newton_iterations = 0;
    int pcg_iterations = 0;
    bool stalled = false;
    std::vector<double> objective_trace; // L at x0 and after each accepted iterate
};

/// Builds the reduced Newton system: elastic + contact Hessian over free
/// (non-anchored) vertices, with a deterministic two-phase scatter.
class SystemAssembler {
public:
    explicit SystemAssembler(const ClothModel& model);

    /// Rebuilds the free-DOF pattern when the anchor set or contact list
    /// changed; cheap when both are unchanged.
    void configure(const std::vector<uint8_t>& anchored,
                   const std::vector<ContactConstraint>& contacts, const ContactForce& cf);

    /// Fills H (elastic + active contact blocks, free x free) and the full
    /// elastic + contact gradient at x.
    void assemble(const VecX& x_full, double thickness, Bcsr3& h_out, VecX& grad_full);

    const std::vector<int>& free_vertices() const { return free_vertices_; }
    const std::vector<int>& free_index() const { return free_index_; }
    const Bcsr3& matrix() const { return h_; }
    Bcsr3& matrix() { return h_; }

    /// Adds scale * vertex_mass to the diagonal (the M/h^2 term).
    void add_mass_diagonal(double scale);

private:
    const ClothModel* model_;
    std::vector<uint8_t> anchored_;
    std::vector<ContactConstraint> contacts_;
    ContactForce cf_;

    std::vector<int> free_vertices_;
    std::vector<int> free_index_;
    Bcsr3 h_;
    std::vector<int> stretch_entries_; // 9 per triangle, -1 when eliminated
    std::vector<int> hinge_entries_;   // 16 per hinge
    std::vector<int> contact_entries_; // 16 per contact
    std::vector<int> diag_entries_;    // per free vertex
    bool pattern_ready_ = false;

    std::vector<StretchScratch> stretch_scratch_;
    std::vector<HingeScratch> hinge_scratch_;
};

/// One implicit-Euler step as an energy minimization (inexact Newton with a
/// fixed MAS-preconditioned PCG budget, backtracking line search, hard
/// Dirichlet anchors).
class ImplicitSolver {
public:
    ImplicitSolver(const ClothModel& model, SolverConfig config);

    const SolverConfig& config() const { return config_; }
    SolverConfig& config() { return config_; }

    StepStats step(SimState& state, const std::vector<AnchorTarget>& anchors,
                   const std::vector<ContactConstraint>& contacts, const ContactForce& cf,
                   const Vec3& gravity);

private:
    const ClothModel* model_;
    SolverConfig config_;
    SystemAssembler assembler_;
};

/// The reduced linear system (M/h^2 + H) dx = -grad L at the given state;
/// exposed for direct inspection and oracle comparisons.
struct AssembledSystem {
    Bcsr3 matrix;
    VecX rhs;
    std::vector<int> free_vertices;
};

AssembledSystem assemble_system(const ClothModel& model, const VecX& x_full,
                                const VecX& x_hat_full, double h,
                                const std::vector<AnchorTarget>& anchors,
                                const std::vector<ContactConstraint>& contacts,
                                const ContactForce& cf, const VecX* external_force = nullptr);

} // namespace gdyn
