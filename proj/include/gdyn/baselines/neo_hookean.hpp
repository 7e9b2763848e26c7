#pragma once

#include "gdyn/assets/mesh.hpp"
#include "gdyn/core/types.hpp"

namespace gdyn {

/// Incompressible Neo-Hookean membrane: W = C10 (I1_bar - 3) per unit
/// volume, with the thickness stretch set by lambda3 = 1/(lambda1 lambda2).
class NeoHookeanMembrane {
public:
    NeoHookeanMembrane(const TriangleMesh& mesh, double c10, double thickness);

    double energy(const VecX& x) const;
    void add_gradient(const VecX& x, VecX& grad) const;

private:
    struct Element {
        int v[3];
        double su[3], sw[3];
        double area;
    };
    double element_terms(const VecX& x, const Element& e, Vec3 df[3]) const;

    std::vector<Element> elements_;
    double c10_;
    double thickness_;
};

} // namespace gdyn
