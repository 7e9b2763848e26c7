#include "gdyn/constitutive/cloth_model.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/core/parallel.hpp"

#include <cmath>
#include <map>

namespace gdyn {

namespace {
constexpr double kLenClamp = 1e-9; // strain denominator clamp
} // namespace

ClothModel::ClothModel(const TriangleMesh& mesh, const Material& material)
    : mesh_(&mesh), material_(material), n_vertices_(mesh.vertex_count())
{
    material_.validate();
    mesh.validate();

    stretch_.reserve(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Tri& tri = mesh.triangles[t];
        const Mat2 dminv = mesh.rest_shape(t).inverse();
        StretchElement e;
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
        stretch_.push_back(e);
    }

    // Hinges over interior manifold edges. Key is the undirected edge; the
    // triangle listing the edge in winding order (a -> b) is side A.
    struct EdgeInfo {
        int count = 0;
        int opp[2] = {-1, -1};
        int tri[2] = {-1, -1};
        bool a_first[2] = {false, false};
    };
    std::map<std::pair<int, int>, EdgeInfo> edge_map;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Tri& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3], opp = tri[(k + 2) % 3];
            const auto key = std::minmax(a, b);
            EdgeInfo& info = edge_map[{key.first, key.second}];
            if (info.count >= 2)
                throw NonManifold(key.first, key.second, "edge with more than two triangles");
            info.opp[info.count] = opp;
            info.tri[info.count] = t;
            info.a_first[info.count] = (a == key.first);
            ++info.count;
        }
    }
    const VecX rest = flatten(mesh.rest_positions);
    for (const auto& [edge, info] : edge_map) {
        if (info.count != 2) continue;
        HingeElement h;
        // Orient so side A is the triangle traversing the edge v0 -> v1.
        if (info.a_first[0]) {
            h.v[0] = edge.first;
            h.v[1] = edge.second;
        } else {
            h.v[0] = edge.second;
            h.v[1] = edge.first;
        }
        h.v[2] = info.opp[0];
        h.v[3] = info.opp[1];

        const Vec3 p0 = vec3_at(rest, h.v[0]);
        const Vec3 p1 = vec3_at(rest, h.v[1]);
        const Vec3 p2 = vec3_at(rest, h.v[2]);
        const Vec3 p3 = vec3_at(rest, h.v[3]);
        const double len = (p1 - p0).norm();
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm() +
                            0.5 * (p1 - p0).cross(p3 - p0).norm();
        h.rest_len = len;
        h.scale = len * len / std::max(area, 1e-12);

        // Stiffness weighting by hinge orientation: an edge along the warp
        // axis bends the weft direction and vice versa.
        double align = 0.0; // mean squared cosine between edge and warp axis
        int n_align = 0;
        for (int side = 0; side < 2; ++side) {
            const int t = info.tri[side];
            const Tri& tri = mesh.triangles[t];
            int ia = -1, ib = -1;
            for (int k = 0; k < 3; ++k) {
                if (tri[k] == h.v[0]) ia = k;
                if (tri[k] == h.v[1]) ib = k;
            }
            if (ia < 0 || ib < 0) continue;
            const Vec2 eu = mesh.material_frames[t][ib] - mesh.material_frames[t][ia];
            const double n2 = eu.squaredNorm();
            if (n2 > 0) {
                align += (eu.x() * eu.x()) / n2;
                ++n_align;
            }
        }
        if (n_align > 0) align /= n_align;
        h.k_lin = material_.bend_warp * (1.0 - align) + material_.bend_weft * align;
        h.k_quad = material_.bend_quadratic;

        // Rest dihedral from rest geometry.
        const Vec3 e0 = p1 - p0;
        const Vec3 na = e0.cross(p2 - p0);
        const Vec3 nb = (p3 - p0).cross(e0);
        const double sin_t = na.cross(nb).dot(e0.normalized());
        const double cos_t = na.dot(nb);
        h.rest_angle = std::atan2(sin_t, cos_t);
        hinges_.push_back(h);
    }
}

// ---------------------------------------------------------------------------
// stretch

void ClothModel::eval_stretch(const VecX& x, int t, StretchScratch& out) const
{
    const StretchElement& e = stretch_[t];
    const Vec3 p0 = vec3_at(x, e.v[0]);
    const Vec3 p1 = vec3_at(x, e.v[1]);
    const Vec3 p2 = vec3_at(x, e.v[2]);

    const Vec3 wu = e.su[0] * p0 + e.su[1] * p1 + e.su[2] * p2;
    const Vec3 ww = e.sw[0] * p0 + e.sw[1] * p1 + e.sw[2] * p2;

    double lu = wu.norm();
    double lw = ww.norm();
    if (lu < kLenClamp || lw < kLenClamp) {
        degenerate_events_.fetch_add(1, std::memory_order_relaxed);
        lu = std::max(lu, kLenClamp);
        lw = std::max(lw, kLenClamp);
    }
    const Vec3 hu = wu / lu;
    const Vec3 hw = ww / lw;

    const double cw = lu - 1.0;
    const double ce = lw - 1.0;
    const double cs = wu.dot(ww);

    const double kw = material_.stretch_warp * e.area;
    const double ke = material_.stretch_weft * e.area;
    const double ks = material_.stretch_shear * e.area;

    const Vec3 dwu = kw * cw * hu + ks * cs * ww; // dE/dwu
    const Vec3 dww = ke * ce * hw + ks * cs * wu; // dE/dww
    for (int k = 0; k < 3; ++k) out.grad[k] = e.su[k] * dwu + e.sw[k] * dww;

    // PSD pieces in (wu, ww) space:
    //   warp/weft: k [h h^T + max(c,0)/l (I - h h^T)]
    //   shear:     k [G G^T + |c| P_sign], P the projector onto the +/-
    //              eigenspace of the swap operator.
    // outer products are materialized before scaling so the blocks stay
    // exactly symmetric
    const Mat3 huu = hu * hu.transpose();
    const Mat3 hww = hw * hw.transpose();
    Mat3 tl = kw * (huu + (std::max(cw, 0.0) / lu) * (Mat3::Identity() - huu));
    Mat3 br = ke * (hww + (std::max(ce, 0.0) / lw) * (Mat3::Identity() - hww));
    Mat3 tr = Mat3::Zero();
    if (ks != 0.0) {
        const Mat3 www = ww * ww.transpose();
        const Mat3 wuu = wu * wu.transpose();
        tl += ks * www;
        br += ks * wuu;
        tr = ks * (ww * wu.transpose());
        const double half_abs = 0.5 * ks * std::abs(cs);
        tl += half_abs * Mat3::Identity();
        br += half_abs * Mat3::Identity();
        tr += (cs >= 0.0 ? half_abs : -half_abs) * Mat3::Identity();
    }

    int idx = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j, ++idx) {
            if (i == j) {
                // keep the diagonal block exactly symmetric: T + T^T sums the
                // same two addends on both sides of the diagonal
                const Mat3 t = (e.su[i] * e.sw[i]) * tr;
                out.hess[idx] = e.su[i] * e.su[i] * tl + e.sw[i] * e.sw[i] * br +
                                (t + t.transpose());
            } else {
                out.hess[idx] = e.su[i] * e.su[j] * tl + e.sw[i] * e.sw[j] * br +
                                e.su[i] * e.sw[j] * tr + e.sw[i] * e.su[j] * tr.transpose();
            }
        }
    }
}

double ClothModel::stretch_energy(const VecX& x) const
{
    return ordered_sum(stretch_.size(), [&](size_t b, size_t e) {
        double acc = 0.0;
        for (size_t t = b; t < e; ++t) {
            const StretchElement& el = stretch_[t];
            const Vec3 p0 = vec3_at(x, el.v[0]);
            const Vec3 p1 = vec3_at(x, el.v[1]);
            const Vec3 p2 = vec3_at(x, el.v[2]);
            const Vec3 wu = el.su[0] * p0 + el.su[1] * p1 + el.su[2] * p2;
            const Vec3 ww = el.sw[0] * p0 + el.sw[1] * p1 + el.sw[2] * p2;
            const double cw = wu.norm() - 1.0;
            const double ce = ww.norm() - 1.0;
            const double cs = wu.dot(ww);
            acc += 0.5 * el.area *
                   (material_.stretch_warp * cw * cw + material_.stretch_weft * ce * ce +
                    material_.stretch_shear * cs * cs);
        }
        return acc;
    });
}

void ClothModel::add_stretch_gradient(const VecX& x, VecX& grad) const
{
    std::vector<StretchScratch> scratch(stretch_.size());
    parallel_for(stretch_.size(), [&](size_t b, size_t e) {
        for (size_t t = b; t < e; ++t) eval_stretch(x, static_cast<int>(t), scratch[t]);
    });
    for (size_t t = 0; t < stretch_.size(); ++t)
        for (int k = 0; k < 3; ++k) grad.segment<3>(3 * stretch_[t].v[k]) += scratch[t].grad[k];
}

// ---------------------------------------------------------------------------
// bending

namespace {

struct DihedralEval {
    double theta;
    Vec3 grad[4];
};

DihedralEval dihedral(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3,
                      std::atomic<int>* degenerate_counter)
{
    DihedralEval out;
    const Vec3 e0 = x1 - x0;
    const Vec3 na = e0.cross(x2 - x0);
    const Vec3 nb = (x3 - x0).cross(e0);
    double l = e0.norm();
    double na2 = na.squaredNorm();
    double nb2 = nb.squaredNorm();
    if (l < kLenClamp || na2 < kLenClamp * kLenClamp || nb2 < kLenClamp * kLenClamp) {
        if (degenerate_counter) degenerate_counter->fetch_add(1, std::memory_order_relaxed);
        l = std::max(l, kLenClamp);
        na2 = std::max(na2, kLenClamp * kLenClamp);
        nb2 = std::max(nb2, kLenClamp * kLenClamp);
    }
    const double sin_t = na.cross(nb).dot(e0 / l);
    const double cos_t = na.dot(nb);
    out.theta = std::atan2(sin_t, cos_t);

    const double wa = 1.0 / na2;
    const double wb = 1.0 / nb2;
    out.grad[2] = -(l * wa) * na;
    out.grad[3] = -(l * wb) * nb;
    out.grad[0] = ((x2 - x1).dot(e0) * wa / l) * (-na) + ((x3 - x1).dot(e0) * wb / l) * (-nb);
    out.grad[1] = ((x2 - x0).dot(e0) * wa / l) * na + ((x3 - x0).dot(e0) * wb / l) * nb;
    return out;
}

} // namespace

void ClothModel::eval_hinge(const VecX& x, int h, HingeScratch& out) const
{
    const HingeElement& el = hinges_[h];
    const DihedralEval d = dihedral(vec3_at(x, el.v[0]), vec3_at(x, el.v[1]),
                                    vec3_at(x, el.v[2]), vec3_at(x, el.v[3]),
                                    &degenerate_events_);
    const double phi = d.theta - el.rest_angle;
    const double dE = el.scale * (el.k_lin * phi + el.k_quad * phi * std::abs(phi));
    out.weight = el.scale * (el.k_lin + 2.0 * el.k_quad * std::abs(phi));
    for (int k = 0; k < 4; ++k) {
        out.theta_grad[k] = d.grad[k];
        out.grad[k] = dE * d.grad[k];
    }
}

double ClothModel::bending_energy(const VecX& x) const
{
    return ordered_sum(hinges_.size(), [&](size_t b, size_t e) {
        double acc = 0.0;
        for (size_t h = b; h < e; ++h) {
            const HingeElement& el = hinges_[h];
            const DihedralEval d = dihedral(vec3_at(x, el.v[0]), vec3_at(x, el.v[1]),
                                            vec3_at(x, el.v[2]), vec3_at(x, el.v[3]), nullptr);
            const double phi = d.theta - el.rest_angle;
            const double ap = std::abs(phi);
            acc += el.scale * (0.5 * el.k_lin * phi * phi + el.k_quad * ap * ap * ap / 3.0);
        }
        return acc;
    });
}

void ClothModel::add_bending_gradient(const VecX& x, VecX& grad) const
{
    std::vector<HingeScratch> scratch(hinges_.size());
    parallel_for(hinges_.size(), [&](size_t b, size_t e) {
        for (size_t h = b; h < e; ++h) eval_hinge(x, static_cast<int>(h), scratch[h]);
    });
    for (size_t h = 0; h < hinges_.size(); ++h)
        for (int k = 0; k < 4; ++k) grad.segment<3>(3 * hinges_[h].v[k]) += scratch[h].grad[k];
}

// ---------------------------------------------------------------------------
// gravity and totals

double ClothModel::gravity_energy(const VecX& x, const Vec3& gravity) const
{
    double acc = 0.0;
    const auto& m = mesh_->vertex_mass;
    for (int i = 0; i < n_vertices_; ++i) acc -= m[i] * gravity.dot(vec3_at(x, i));
    return acc;
}

void ClothModel::add_gravity_gradient(VecX& grad, const Vec3& gravity) const
{
    const auto& m = mesh_->vertex_mass;
    for (int i = 0; i < n_vertices_; ++i) grad.segment<3>(3 * i) -= m[i] * gravity;
}

void ClothModel::add_total_gradient(const VecX& x, VecX& grad, const Vec3& gravity) const
{
    add_stretch_gradient(x, grad);
    add_bending_gradient(x, grad);
    add_gravity_gradient(grad, gravity);
}

Bcsr3 ClothModel::elastic_hessian(const VecX& x) const
{
    std::vector<std::pair<int, int>> pairs;
    for (const StretchElement& e : stretch_)
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                pairs.emplace_back(std::min(e.v[i], e.v[j]), std::max(e.v[i], e.v[j]));
    for (const HingeElement& h : hinges_)
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j)
                pairs.emplace_back(std::min(h.v[i], h.v[j]), std::max(h.v[i], h.v[j]));
    Bcsr3 H;
    H.build_pattern(n_vertices_, std::move(pairs));

    StretchScratch ss;
    for (int t = 0; t < static_cast<int>(stretch_.size()); ++t) {
        eval_stretch(x, t, ss);
        const StretchElement& e = stretch_[t];
        int idx = 0;
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j, ++idx) {
                H.add_block(H.entry(e.v[i], e.v[j]), ss.hess[idx]);
                if (i != j) H.add_block(H.entry(e.v[j], e.v[i]), ss.hess[idx].transpose());
            }
        }
    }
    HingeScratch hs;
    for (int h = 0; h < static_cast<int>(hinges_.size()); ++h) {
        eval_hinge(x, h, hs);
        const HingeElement& el = hinges_[h];
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                // outer product first keeps diagonal blocks exactly symmetric
                const Mat3 outer = hs.theta_grad[i] * hs.theta_grad[j].transpose();
                const Mat3 block = hs.weight * outer;
                H.add_block(H.entry(el.v[i], el.v[j]), block);
                if (i != j) H.add_block(H.entry(el.v[j], el.v[i]), block.transpose());
            }
        }
    }
    return H;
}

ElementStretchState ClothModel::stretch_state(const VecX& x, int t) const
{
    const StretchElement& e = stretch_[t];
    const Vec3 p0 = vec3_at(x, e.v[0]);
    const Vec3 p1 = vec3_at(x, e.v[1]);
    const Vec3 p2 = vec3_at(x, e.v[2]);
    ElementStretchState st;
    st.triangle = t;
    st.deformation.col(0) = e.su[0] * p0 + e.su[1] * p1 + e.su[2] * p2;
    st.deformation.col(1) = e.sw[0] * p0 + e.sw[1] * p1 + e.sw[2] * p2;
    st.c_warp = st.deformation.col(0).norm() - 1.0;
    st.c_weft = st.deformation.col(1).norm() - 1.0;
    st.c_shear = st.deformation.col(0).dot(st.deformation.col(1));
    return st;
}

HingeState ClothModel::hinge_state(const VecX& x, int h) const
{
    const HingeElement& el = hinges_[h];
    const DihedralEval d = dihedral(vec3_at(x, el.v[0]), vec3_at(x, el.v[1]),
                                    vec3_at(x, el.v[2]), vec3_at(x, el.v[3]), nullptr);
    HingeState st;
    for (int k = 0; k < 4; ++k) st.v[k] = el.v[k];
    st.theta = d.theta;
    st.rest_angle = el.rest_angle;
    st.curvature = d.theta * el.rest_len / std::max(el.rest_len * el.rest_len / el.scale, 1e-12);
    return st;
}

} // namespace gdyn
