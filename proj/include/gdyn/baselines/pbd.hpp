#pragma once

#include "gdyn/assets/mesh.hpp"
#include "gdyn/core/types.hpp"
#include "gdyn/solver/implicit.hpp" // SimState, AnchorTarget

#include <vector>

namespace gdyn {

struct PbdConstraint {
    int i, j;
    double rest; // m, > 0
};

/// Position-based dynamics with distance constraints on mesh edges,
/// Gauss-Seidel projection in fixed constraint order.
class PbdSolver {
public:
    PbdSolver(const TriangleMesh& mesh, std::vector<double> mass, int iterations);

    void step(SimState& state, double h, const Vec3& gravity,
              const std::vector<AnchorTarget>& anchors);

    int iterations() const { return iterations_; }
    void set_iterations(int it) { iterations_ = it; }
    const std::vector<PbdConstraint>& constraints() const { return constraints_; }

private:
    std::vector<PbdConstraint> constraints_;
    std::vector<double> inv_mass_;
    int iterations_;
};

} // namespace gdyn
