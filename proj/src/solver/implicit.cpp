#include "gdyn/solver/implicit.hpp"

#include "gdyn/core/blas.hpp"
#include "gdyn/core/errors.hpp"
#include "gdyn/core/parallel.hpp"
#include "gdyn/solver/pcg.hpp"

#include <cmath>

namespace gdyn {

namespace {
constexpr double kGradExitTol = 1e-9; // N, per-component early exit
constexpr int kMaxHalvings = 20;
} // namespace

SimState SimState::from_mesh(const TriangleMesh& mesh)
{
    SimState s;
    s.x = flatten(mesh.positions);
    s.v = VecX::Zero(s.x.size());
    return s;
}

void SolverConfig::validate() const
{
    if (!(h > 0)) throw std::invalid_argument("time step must be > 0");
    if (newton_iters < 1) throw std::invalid_argument("newton_iters must be >= 1");
    if (pcg_iters < 1) throw std::invalid_argument("pcg_iters must be >= 1");
    if (mas_block_size < 1) throw std::invalid_argument("mas_block_size must be >= 1");
    if (mas_levels < 1) throw std::invalid_argument("mas_levels must be >= 1");
}

// ---------------------------------------------------------------------------
// SystemAssembler

SystemAssembler::SystemAssembler(const ClothModel& model) : model_(&model)
{
    anchored_.assign(model.vertex_count(), 2); // force first configure
}

void SystemAssembler::configure(const std::vector<uint8_t>& anchored,
                                const std::vector<ContactConstraint>& contacts,
                                const ContactForce& cf)
{
    cf_ = cf;
    const bool anchors_same = (anchored == anchored_);
    const bool contacts_same = contacts.empty() && contacts_.empty();
    contacts_ = contacts;
    if (anchors_same && contacts_same && pattern_ready_) return;
    anchored_ = anchored;

    const int n = model_->vertex_count();
    free_vertices_.clear();
    free_index_.assign(n, -1);
    for (int v = 0; v < n; ++v) {
        if (!anchored_[v]) {
            free_index_[v] = static_cast<int>(free_vertices_.size());
            free_vertices_.push_back(v);
        }
    }
    const int nf = static_cast<int>(free_vertices_.size());

    std::vector<std::pair<int, int>> pairs;
    auto add_pair = [&](int a, int b) {
        const int fa = free_index_[a], fb = free_index_[b];
        if (fa < 0 || fb < 0) return;
        pairs.emplace_back(std::min(fa, fb), std::max(fa, fb));
    };
    for (const StretchElement& e : model_->stretch_elements())
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) add_pair(e.v[i], e.v[j]);
    for (const HingeElement& hg : model_->hinges())
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) add_pair(hg.v[i], hg.v[j]);
    for (const ContactConstraint& c : contacts_)
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j)
                if (c.verts[i] >= 0 && c.verts[j] >= 0) add_pair(c.verts[i], c.verts[j]);

    h_.build_pattern(nf, std::move(pairs));

    auto entry_of = [&](int a, int b) {
        const int fa = free_index_[a], fb = free_index_[b];
        if (fa < 0 || fb < 0) return -1;
        return h_.entry(fa, fb);
    };
    const auto& stretch = model_->stretch_elements();
    stretch_entries_.assign(stretch.size() * 9, -1);
    for (size_t t = 0; t < stretch.size(); ++t)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                stretch_entries_[t * 9 + i * 3 + j] = entry_of(stretch[t].v[i], stretch[t].v[j]);
    const auto& hinges = model_->hinges();
    hinge_entries_.assign(hinges.size() * 16, -1);
    for (size_t hh = 0; hh < hinges.size(); ++hh)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                hinge_entries_[hh * 16 + i * 4 + j] = entry_of(hinges[hh].v[i], hinges[hh].v[j]);
    contact_entries_.assign(contacts_.size() * 16, -1);
    for (size_t c = 0; c < contacts_.size(); ++c)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (contacts_[c].verts[i] >= 0 && contacts_[c].verts[j] >= 0)
                    contact_entries_[c * 16 + i * 4 + j] =
                        entry_of(contacts_[c].verts[i], contacts_[c].verts[j]);
    diag_entries_.resize(nf);
    for (int f = 0; f < nf; ++f) diag_entries_[f] = h_.entry(f, f);
    pattern_ready_ = true;
}

void SystemAssembler::assemble(const VecX& x_full, double thickness, Bcsr3& h_out, VecX& grad_full)
{
    const auto& stretch = model_->stretch_elements();
    const auto& hinges = model_->hinges();
    stretch_scratch_.resize(stretch.size());
    hinge_scratch_.resize(hinges.size());

    parallel_for(stretch.size(), [&](size_t b, size_t e) {
        for (size_t t = b; t < e; ++t)
            model_->eval_stretch(x_full, static_cast<int>(t), stretch_scratch_[t]);
    }, 64);
    parallel_for(hinges.size(), [&](size_t b, size_t e) {
        for (size_t t = b; t < e; ++t)
            model_->eval_hinge(x_full, static_cast<int>(t), hinge_scratch_[t]);
    }, 64);

    grad_full.setZero();
    h_out.set_zero();

    // upper-block index within StretchScratch::hess for ordered (i, j), i<=j
    static constexpr int kUpper[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

    for (size_t t = 0; t < stretch.size(); ++t) {
        const StretchElement& e = stretch[t];
        const StretchScratch& s = stretch_scratch_[t];
        for (int i = 0; i < 3; ++i) grad_full.segment<3>(3 * e.v[i]) += s.grad[i];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const int entry = stretch_entries_[t * 9 + i * 3 + j];
                if (entry < 0) continue;
                const Mat3& blk = s.hess[kUpper[i][j]];
                h_out.add_block(entry, i <= j ? blk : Mat3(blk.transpose()));
            }
        }
    }
    for (size_t hh = 0; hh < hinges.size(); ++hh) {
        const HingeElement& el = hinges[hh];
        const HingeScratch& s = hinge_scratch_[hh];
        for (int i = 0; i < 4; ++i) grad_full.segment<3>(3 * el.v[i]) += s.grad[i];
        if (s.weight == 0.0) continue;
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                const int eij = hinge_entries_[hh * 16 + i * 4 + j];
                const int eji = hinge_entries_[hh * 16 + j * 4 + i];
                if (eij < 0) continue;
                if (i == j) {
                    const Vec3 g = s.theta_grad[i];
                    const Mat3 outer = g * g.transpose(); // exactly symmetric
                    h_out.add_block(eij, Mat3(s.weight * outer));
                } else {
                    const Mat3 blk =
                        s.weight * s.theta_grad[i] * s.theta_grad[j].transpose();
                    h_out.add_block(eij, blk);
                    h_out.add_block(eji, Mat3(blk.transpose()));
                }
            }
        }
    }
    for (size_t c = 0; c < contacts_.size(); ++c) {
        const ContactConstraint& con = contacts_[c];
        const double gap = con.eval_gap_raw(x_full.data(), thickness);
        const double pen = cf_.activation - gap;
        if (pen <= 0) continue;
        double w[4];
        con.weights(w);
        const Vec3 dE = -cf_.stiffness * pen * con.normal;
        const Mat3 nn = con.normal * con.normal.transpose(); // exactly symmetric
        for (int i = 0; i < 4; ++i) {
            if (con.verts[i] < 0) continue;
            grad_full.segment<3>(3 * con.verts[i]) += w[i] * dE;
            for (int j = 0; j < 4; ++j) {
                const int entry = contact_entries_[c * 16 + i * 4 + j];
                if (entry < 0) continue;
                h_out.add_block(entry, Mat3((cf_.stiffness * (w[i] * w[j])) * nn));
            }
        }
    }
}

void SystemAssembler::add_mass_diagonal(double scale)
{
    const auto& mass = model_->mesh().vertex_mass;
    for (size_t f = 0; f < free_vertices_.size(); ++f) {
        const double m = mass[free_vertices_[f]] * scale;
        h_.add_block(diag_entries_[f], Mat3(m * Mat3::Identity()));
    }
}

// ---------------------------------------------------------------------------
// ImplicitSolver

ImplicitSolver::ImplicitSolver(const ClothModel& model, SolverConfig config)
    : model_(&model), config_(config), assembler_(model)
{
    config_.validate();
}

StepStats ImplicitSolver::step(SimState& state, const std::vector<AnchorTarget>& anchors,
                               const std::vector<ContactConstraint>& contacts,
                               const ContactForce& cf, const Vec3& gravity)
{
    const int n = model_->vertex_count();
    const double h = config_.h;
    const auto& mass = model_->mesh().vertex_mass;
    const double thickness = model_->material().thickness;
    StepStats stats;

    if (!state.x.allFinite() || !state.v.allFinite())
        throw NumericalFailure("state contains NaN/Inf");

    std::vector<uint8_t> anchored(n, 0);
    for (const AnchorTarget& a : anchors) anchored[a.vertex] = 1;
    for (int v = 0; v < n; ++v)
        if (!anchored[v] && !(mass[v] > 0.0))
            throw NumericalFailure("free vertex with zero mass; assign a material first");

    assembler_.configure(anchored, contacts, cf);
    const auto& free = assembler_.free_vertices();
    const int nf = static_cast<int>(free.size());

    // Explicit friction from start-of-step velocities, rhs only.
    VecX friction = VecX::Zero(3 * n);
    if (!contacts.empty()) {
        const std::vector<Vec3> pos_list = unflatten(state.x);
        add_friction_forces(contacts, pos_list, state.v, mass, thickness, cf, h, friction);
    }

    // Anchored vertices move to their prescriptions for the whole solve.
    VecX x_full = state.x;
    for (const AnchorTarget& a : anchors) x_full.segment<3>(3 * a.vertex) = a.position;

    // Inertial predictor (gravity enters here, not the objective energy).
    VecX x_hat = VecX(3 * nf);
    for (int f = 0; f < nf; ++f) {
        const int v = free[f];
        x_hat.segment<3>(3 * f) = state.x.segment<3>(3 * v) + h * state.v.segment<3>(3 * v) +
                                  h * h * gravity;
    }
    for (int f = 0; f < nf; ++f) x_full.segment<3>(3 * free[f]) = x_hat.segment<3>(3 * f);

    auto objective = [&](const VecX& xf) {
        double inertia = 0.0;
        for (int f = 0; f < nf; ++f) {
            const Vec3 d = xf.segment<3>(3 * free[f]) - x_hat.segment<3>(3 * f);
            inertia += mass[free[f]] * d.squaredNorm();
        }
        inertia /= 2.0 * h * h;
        double e = model_->elastic_energy(xf);
        if (!contacts.empty()) e += contact_energy_raw(contacts, xf.data(), thickness, cf);
        double work = 0.0;
        if (!contacts.empty()) work = par_dot(friction, xf);
        return inertia + e - work;
    };

    double l_curr = objective(x_full);
    if (!std::isfinite(l_curr)) throw NumericalFailure("objective is not finite");
    stats.objective_trace.push_back(l_curr);

    VecX grad_full(3 * n);
    VecX rhs(3 * nf);
    MasPreconditioner mas;
    bool mas_ready = false;

    for (int it = 0; it < config_.newton_iters; ++it) {
        assembler_.assemble(x_full, thickness, assembler_.matrix(), grad_full);
        assembler_.add_mass_diagonal(1.0 / (h * h));

        double grad_inf = 0.0;
        for (int f = 0; f < nf; ++f) {
            const int v = free[f];
            const Vec3 inertia_grad =
                (mass[v] / (h * h)) * (x_full.segment<3>(3 * v) - x_hat.segment<3>(3 * f));
            const Vec3 g = grad_full.segment<3>(3 * v) + inertia_grad - friction.segment<3>(3 * v);
            rhs.segment<3>(3 * f) = -g;
            grad_inf = std::max(grad_inf, g.cwiseAbs().maxCoeff());
        }
        if (grad_inf < kGradExitTol) break;

        if (!mas_ready) {
            mas = MasPreconditioner::build(assembler_.matrix(),
                                           {config_.mas_levels, config_.mas_block_size});
            mas_ready = true;
        }
        const PcgResult sol =
            pcg_solve(assembler_.matrix(), rhs, &mas, config_.pcg_iters, config_.pcg_tol);
        stats.pcg_iterations += sol.iterations;
        ++stats.newton_iterations;

        // Backtracking on the objective; the PCG direction is a descent
        // direction for SPD systems even when truncated.
        double alpha = 1.0;
        bool accepted = false;
        VecX x_trial = x_full;
        for (int halving = 0; halving <= kMaxHalvings; ++halving) {
            for (int f = 0; f < nf; ++f)
                x_trial.segment<3>(3 * free[f]) =
                    x_full.segment<3>(3 * free[f]) + alpha * sol.x.segment<3>(3 * f);
            const double l_trial = objective(x_trial);
            if (l_trial <= l_curr) {
                x_full.swap(x_trial);
                l_curr = l_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        stats.objective_trace.push_back(l_curr);
        if (!accepted) {
            stats.stalled = true;
            break;
        }
    }

    if (!x_full.allFinite()) throw NumericalFailure("step produced NaN positions");

    state.v = (x_full - state.x) / h;
    const double damp = std::clamp(1.0 - model_->material().damping * h, 0.0, 1.0);
    if (damp != 1.0) state.v *= damp;
    state.x = x_full;
    state.t += h;
    return stats;
}

// ---------------------------------------------------------------------------
// standalone assemble (oracle/test surface)

AssembledSystem assemble_system(const ClothModel& model, const VecX& x_full,
                                const VecX& x_hat_full, double h,
                                const std::vector<AnchorTarget>& anchors,
                                const std::vector<ContactConstraint>& contacts,
                                const ContactForce& cf, const VecX* external_force)
{
    const int n = model.vertex_count();
    std::vector<uint8_t> anchored(n, 0);
    for (const AnchorTarget& a : anchors) anchored[a.vertex] = 1;

    SystemAssembler assembler(model);
    assembler.configure(anchored, contacts, cf);
    VecX grad_full(3 * n);
    assembler.assemble(x_full, model.material().thickness, assembler.matrix(), grad_full);
    assembler.add_mass_diagonal(1.0 / (h * h));

    AssembledSystem out;
    out.free_vertices = assembler.free_vertices();
    const int nf = static_cast<int>(out.free_vertices.size());
    out.rhs.resize(3 * nf);
    const auto& mass = model.mesh().vertex_mass;
    for (int f = 0; f < nf; ++f) {
        const int v = out.free_vertices[f];
        Vec3 g = grad_full.segment<3>(3 * v) +
                 (mass[v] / (h * h)) *
                     (x_full.segment<3>(3 * v) - x_hat_full.segment<3>(3 * v));
        if (external_force) g -= external_force->segment<3>(3 * v);
        out.rhs.segment<3>(3 * f) = -g;
    }
    out.matrix = assembler.matrix();
    return out;
}

} // namespace gdyn
