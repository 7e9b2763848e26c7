#include "gdyn/baselines/neo_hookean.hpp"

#include "gdyn/core/errors.hpp"

#include <cmath>

namespace gdyn {

NeoHookeanMembrane::NeoHookeanMembrane(const TriangleMesh& mesh, double c10, double thickness)
    : c10_(c10), thickness_(thickness)
{
    mesh.validate();
    elements_.reserve(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Tri& tri = mesh.triangles[t];
        const Mat2 dminv = mesh.rest_shape(t).inverse();
        Element e;
        e.v[0] = tri[0];
        e.v[1] = tri[1];
        e.v[2] = tri[2];
        e.area = mesh.triangle_rest_area(t);
        const double a = dminv(0, 0), b = dminv(0, 1), c = dminv(1, 0), d = dminv(1, 1);
        e.su[0] = -a - c;
        e.su[1] = a;
        e.su[2] = c;
        e.sw[0] = -b - d;
        e.sw[1] = b;
        e.sw[2] = d;
        elements_.push_back(e);
    }
}

// Returns I1_bar - 3; fills df[k] = d(I1_bar)/dx_k when df != nullptr.
double NeoHookeanMembrane::element_terms(const VecX& x, const Element& e, Vec3 df[3]) const
{
    const Vec3 f1 = e.su[0] * vec3_at(x, e.v[0]) + e.su[1] * vec3_at(x, e.v[1]) +
                    e.su[2] * vec3_at(x, e.v[2]);
    const Vec3 f2 = e.sw[0] * vec3_at(x, e.v[0]) + e.sw[1] * vec3_at(x, e.v[1]) +
                    e.sw[2] * vec3_at(x, e.v[2]);
    const double g00 = f1.squaredNorm();
    const double g11 = f2.squaredNorm();
    const double g01 = f1.dot(f2);
    const double det = g00 * g11 - g01 * g01; // (lambda1 lambda2)^2
    if (det < 1e-18)
        throw DegenerateElement(e.v[0], "collapsed membrane element in Neo-Hookean energy");
    const double i1 = g00 + g11 + 1.0 / det;

    if (df) {
        const double dinv2 = -1.0 / (det * det);
        const Vec3 ddet_df1 = 2.0 * (g11 * f1 - g01 * f2);
        const Vec3 ddet_df2 = 2.0 * (g00 * f2 - g01 * f1);
        const Vec3 di1_df1 = 2.0 * f1 + dinv2 * ddet_df1;
        const Vec3 di1_df2 = 2.0 * f2 + dinv2 * ddet_df2;
        for (int k = 0; k < 3; ++k) df[k] = e.su[k] * di1_df1 + e.sw[k] * di1_df2;
    }
    return i1 - 3.0;
}

double NeoHookeanMembrane::energy(const VecX& x) const
{
    double acc = 0.0;
    for (const Element& e : elements_)
        acc += c10_ * element_terms(x, e, nullptr) * e.area * thickness_;
    return acc;
}

void NeoHookeanMembrane::add_gradient(const VecX& x, VecX& grad) const
{
    Vec3 df[3];
    for (const Element& e : elements_) {
        element_terms(x, e, df);
        const double scale = c10_ * e.area * thickness_;
        for (int k = 0; k < 3; ++k) grad.segment<3>(3 * e.v[k]) += scale * df[k];
    }
}

} // namespace gdyn
