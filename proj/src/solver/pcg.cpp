#include "gdyn/solver/pcg.hpp"

#include "gdyn/core/bcsr.hpp"
#include "gdyn/core/blas.hpp"
#include "gdyn/solver/mas.hpp"

#include <cmath>

namespace gdyn {

PcgResult pcg_solve(const LinearOp& apply_a, const VecX& b, const PrecondOp* precond,
                    int max_iters, double tol)
{
    const Eigen::Index n = b.size();
    PcgResult result;
    result.x = VecX::Zero(n);

    const double b_norm = par_norm(b);
    if (b_norm == 0.0) {
        result.converged = true;
        return result;
    }

    VecX r = b;
    VecX z(n), p(n), ap(n);
    if (precond)
        (*precond)(r, z);
    else
        z = r;
    p = z;
    double rz = par_dot(r, z);
    double best_res = b_norm;
    VecX best_x = result.x;

    for (int k = 0; k < max_iters; ++k) {
        apply_a(p, ap);
        const double pap = par_dot(p, ap);
        if (!(pap > 0.0)) {
            result.breakdown = true;
            result.x = best_x;
            result.rel_residual = best_res / b_norm;
            return result;
        }
        const double alpha = rz / pap;
        par_axpy(alpha, p, result.x);
        par_axpy(-alpha, ap, r);
        ++result.iterations;

        const double res = par_norm(r);
        if (res < best_res) {
            best_res = res;
            best_x = result.x;
        }
        if (res <= tol * b_norm) {
            result.converged = true;
            break;
        }
        if (precond)
            (*precond)(r, z);
        else
            z = r;
        const double rz_new = par_dot(r, z);
        par_xpay(z, rz_new / rz, p); // p = z + beta p
        rz = rz_new;
    }
    result.x = best_x;
    result.rel_residual = best_res / b_norm;
    return result;
}

PcgResult pcg_solve(const Bcsr3& a, const VecX& b, const MasPreconditioner* precond,
                    int max_iters, double tol)
{
    LinearOp apply_a = [&a](const VecX& x, VecX& y) { a.multiply(x, y); };
    if (precond) {
        PrecondOp pre = [precond](const VecX& r, VecX& z) { precond->apply(r, z); };
        return pcg_solve(apply_a, b, &pre, max_iters, tol);
    }
    return pcg_solve(apply_a, b, nullptr, max_iters, tol);
}

} // namespace gdyn
