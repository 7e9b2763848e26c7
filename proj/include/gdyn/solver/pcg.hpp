#pragma once

#include "gdyn/core/types.hpp"

#include <functional>

namespace gdyn {

class Bcsr3;
class MasPreconditioner;

struct PcgResult {
    VecX x;
    double rel_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool breakdown = false; // p^T A p <= 0; x holds the best iterate so far
};

using LinearOp = std::function<void(const VecX&, VecX&)>;
using PrecondOp = std::function<void(const VecX&, VecX&)>;

/// Standard preconditioned conjugate gradient on an SPD operator. Stops at
/// max_iters or relative residual <= tol; returns the best iterate seen.
PcgResult pcg_solve(const LinearOp& apply_a, const VecX& b, const PrecondOp* precond,
                    int max_iters, double tol);

PcgResult pcg_solve(const Bcsr3& a, const VecX& b, const MasPreconditioner* precond,
                    int max_iters, double tol);

} // namespace gdyn
