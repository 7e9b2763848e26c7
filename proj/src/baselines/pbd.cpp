#include "gdyn/baselines/pbd.hpp"

#include <stdexcept>

namespace gdyn {

PbdSolver::PbdSolver(const TriangleMesh& mesh, std::vector<double> mass, int iterations)
    : iterations_(iterations)
{
    if (iterations_ < 1) throw std::invalid_argument("PBD iterations must be >= 1");
    inv_mass_.resize(mass.size());
    for (size_t i = 0; i < mass.size(); ++i) inv_mass_[i] = mass[i] > 0 ? 1.0 / mass[i] : 0.0;
    for (const auto& [i, j] : mesh.edges()) {
        const double rest = (mesh.rest_positions[i] - mesh.rest_positions[j]).norm();
        if (rest > 0) constraints_.push_back({i, j, rest});
    }
}

void PbdSolver::step(SimState& state, double h, const Vec3& gravity,
                     const std::vector<AnchorTarget>& anchors)
{
    const int n = static_cast<int>(inv_mass_.size());
    std::vector<double> w = inv_mass_;

    // Predict tentative positions.
    VecX p = state.x;
    for (int v = 0; v < n; ++v)
        p.segment<3>(3 * v) += h * state.v.segment<3>(3 * v) + h * h * gravity;
    for (const AnchorTarget& a : anchors) {
        p.segment<3>(3 * a.vertex) = a.position;
        w[a.vertex] = 0.0;
    }

    // Mass-weighted distance projection, Gauss-Seidel in constraint order.
    for (int it = 0; it < iterations_; ++it) {
        for (const PbdConstraint& c : constraints_) {
            const double wsum = w[c.i] + w[c.j];
            if (wsum <= 0) continue;
            const Vec3 d = p.segment<3>(3 * c.i) - p.segment<3>(3 * c.j);
            const double len = d.norm();
            if (len < 1e-12) continue;
            const Vec3 corr = ((len - c.rest) / len / wsum) * d;
            p.segment<3>(3 * c.i) -= w[c.i] * corr;
            p.segment<3>(3 * c.j) += w[c.j] * corr;
        }
    }

    state.v = (p - state.x) / h;
    state.x = p;
    state.t += h;
}

} // namespace gdyn
