#include "gdyn/baselines/mass_spring.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/core/parallel.hpp"

#include <atomic>
#include <cmath>
#include <map>

namespace gdyn {

SpringNetwork SpringNetwork::from_mesh(const TriangleMesh& mesh, double ks, double kd)
{
    SpringNetwork net;
    const auto rest = mesh.rest_positions;
    auto add = [&](int i, int j, SpringKind kind) {
        const double len = (rest[i] - rest[j]).norm();
        if (len <= 0) return;
        net.springs.push_back({i, j, len, ks, kd, kind});
    };

    const auto edges = mesh.edges();
    for (const auto& [i, j] : edges) add(i, j, SpringKind::Structural);

    // Opposite vertices across each interior edge: on a quad grid these are
    // the second diagonals (shear), elsewhere they resist shearing too.
    std::map<std::pair<int, int>, std::vector<int>> edge_opp;
    for (const Tri& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const auto key = std::minmax(tri[k], tri[(k + 1) % 3]);
            edge_opp[{key.first, key.second}].push_back(tri[(k + 2) % 3]);
        }
    std::vector<std::pair<int, int>> diag;
    for (const auto& [edge, opp] : edge_opp)
        if (opp.size() == 2) diag.emplace_back(std::minmax(opp[0], opp[1]).first,
                                               std::minmax(opp[0], opp[1]).second);
    std::sort(diag.begin(), diag.end());
    diag.erase(std::unique(diag.begin(), diag.end()), diag.end());
    for (const auto& [i, j] : diag) add(i, j, SpringKind::Shear);

    // Bending: second neighbors whose connecting edges are nearly collinear.
    std::vector<std::vector<int>> neighbors(mesh.vertex_count());
    for (const auto& [i, j] : edges) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
    }
    std::vector<std::pair<int, int>> bend;
    for (int b = 0; b < mesh.vertex_count(); ++b) {
        const auto& nb = neighbors[b];
        for (size_t p = 0; p < nb.size(); ++p) {
            for (size_t q = p + 1; q < nb.size(); ++q) {
                const int a = nb[p], c = nb[q];
                const Vec3 d1 = (rest[b] - rest[a]).normalized();
                const Vec3 d2 = (rest[c] - rest[b]).normalized();
                if (d1.dot(d2) > 0.9) bend.emplace_back(std::min(a, c), std::max(a, c));
            }
        }
    }
    std::sort(bend.begin(), bend.end());
    bend.erase(std::unique(bend.begin(), bend.end()), bend.end());
    for (const auto& [i, j] : bend) add(i, j, SpringKind::Bending);
    return net;
}

Vec3 spring_force(const Spring& s, const Vec3& xi, const Vec3& xj, const Vec3& vi, const Vec3& vj,
                  bool* degenerate)
{
    const Vec3 l = xj - xi;
    const double len = l.norm();
    if (len < 1e-12) {
        if (degenerate) *degenerate = true;
        return Vec3::Zero();
    }
    const Vec3 dir = l / len;
    const Vec3 v_rel = vi - vj;
    // stretched (len > rest) pulls i toward j; damping opposes approach
    return s.ks * (len - s.rest) * dir - s.kd * v_rel.dot(dir) * dir;
}

MassSpringSolver::MassSpringSolver(SpringNetwork network, std::vector<double> mass)
    : network_(std::move(network)), mass_(std::move(mass))
{
    const int n = static_cast<int>(mass_.size());
    incidence_ptr_.assign(size_t(n) + 1, 0);
    for (const Spring& s : network_.springs) {
        ++incidence_ptr_[size_t(s.i) + 1];
        ++incidence_ptr_[size_t(s.j) + 1];
    }
    for (int i = 0; i < n; ++i) incidence_ptr_[size_t(i) + 1] += incidence_ptr_[size_t(i)];
    incidence_.resize(incidence_ptr_.back());
    std::vector<int> cursor(incidence_ptr_.begin(), incidence_ptr_.end() - 1);
    for (size_t k = 0; k < network_.springs.size(); ++k) {
        const Spring& s = network_.springs[k];
        incidence_[cursor[s.i]++] = static_cast<int>(k);
        incidence_[cursor[s.j]++] = static_cast<int>(k);
    }
}

double MassSpringSolver::stable_step_estimate() const
{
    double max_ratio = 0.0;
    for (const Spring& s : network_.springs) {
        const double m = std::min(mass_[s.i], mass_[s.j]);
        if (m > 0) max_ratio = std::max(max_ratio, s.ks / m);
    }
    if (max_ratio <= 0) return 1.0;
    // omega_max ~ sqrt(4 k/m) for a chain of like springs
    return 2.0 / std::sqrt(4.0 * max_ratio);
}

void MassSpringSolver::step(SimState& state, double h, const Vec3& gravity,
                            const std::vector<AnchorTarget>& anchors, bool forward_euler)
{
    const int n = static_cast<int>(mass_.size());
    VecX force = VecX::Zero(3 * n);
    std::atomic<int> degenerate{0};

    // Deterministic per-vertex gather over incident springs.
    parallel_for(size_t(n), [&](size_t vb, size_t ve) {
        for (size_t v = vb; v < ve; ++v) {
            Vec3 f = Vec3::Zero();
            for (int k = incidence_ptr_[v]; k < incidence_ptr_[v + 1]; ++k) {
                const Spring& s = network_.springs[incidence_[k]];
                const int other = (s.i == static_cast<int>(v)) ? s.j : s.i;
                bool degen = false;
                const Vec3 fi = spring_force(s, vec3_at(state.x, static_cast<int>(v)),
                                             vec3_at(state.x, other),
                                             vec3_at(state.v, static_cast<int>(v)),
                                             vec3_at(state.v, other), &degen);
                if (degen) degenerate.fetch_add(1, std::memory_order_relaxed);
                f += fi;
            }
            force.segment<3>(3 * v) = f;
        }
    });
    degenerate_count_ += degenerate.load() / 2; // each spring visited from both ends

    const VecX x_old = state.x;
    if (forward_euler) {
        for (int v = 0; v < n; ++v) {
            state.x.segment<3>(3 * v) += h * state.v.segment<3>(3 * v);
            if (mass_[v] > 0)
                state.v.segment<3>(3 * v) += h * (force.segment<3>(3 * v) / mass_[v] + gravity);
        }
    } else {
        for (int v = 0; v < n; ++v) {
            if (mass_[v] > 0)
                state.v.segment<3>(3 * v) += h * (force.segment<3>(3 * v) / mass_[v] + gravity);
            state.x.segment<3>(3 * v) += h * state.v.segment<3>(3 * v);
        }
    }
    for (const AnchorTarget& a : anchors) {
        state.v.segment<3>(3 * a.vertex) = (a.position - x_old.segment<3>(3 * a.vertex)) / h;
        state.x.segment<3>(3 * a.vertex) = a.position;
    }
    state.t += h;
    if (!state.x.allFinite()) throw NumericalFailure("mass-spring step diverged to NaN");
}

} // namespace gdyn
