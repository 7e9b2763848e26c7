#include "gdyn/collision/contact.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/core/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gdyn {

namespace {
constexpr double kTiny = 1e-12;
} // namespace

// --------------------------------------------------------------------------
// closest-point primitives

Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                            double bary[3])
{
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) {
        bary[0] = 1;
        bary[1] = 0;
        bary[2] = 0;
        return a;
    }
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) {
        bary[0] = 0;
        bary[1] = 1;
        bary[2] = 0;
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        bary[0] = 1 - v;
        bary[1] = v;
        bary[2] = 0;
        return a + v * ab;
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) {
        bary[0] = 0;
        bary[1] = 0;
        bary[2] = 1;
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        bary[0] = 1 - w;
        bary[1] = 0;
        bary[2] = w;
        return a + w * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        bary[0] = 0;
        bary[1] = 1 - w;
        bary[2] = w;
        return b + w * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    bary[0] = 1 - v - w;
    bary[1] = v;
    bary[2] = w;
    return a + ab * v + ac * w;
}

double closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2,
                               double& s, double& t)
{
    const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    if (a <= kTiny && e <= kTiny) {
        s = t = 0;
        return (p1 - p2).norm();
    }
    if (a <= kTiny) {
        s = 0;
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= kTiny) {
            t = 0;
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = (denom > kTiny) ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0) {
                t = 0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1) {
                t = 1;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

// --------------------------------------------------------------------------
// ContactConstraint

void ContactConstraint::weights(double w[4]) const
{
    switch (kind) {
    case ContactKind::VertexTriangle:
        w[0] = 1;
        w[1] = -bary[1];
        w[2] = -bary[2];
        w[3] = -bary[3];
        break;
    case ContactKind::EdgeEdge:
        w[0] = bary[0];
        w[1] = bary[1];
        w[2] = -bary[2];
        w[3] = -bary[3];
        break;
    case ContactKind::Environment:
        w[0] = 1;
        w[1] = w[2] = w[3] = 0;
        break;
    }
}

double ContactConstraint::eval_gap(const std::vector<Vec3>& positions, double thickness) const
{
    double w[4];
    weights(w);
    Vec3 rel = Vec3::Zero();
    for (int k = 0; k < 4; ++k)
        if (verts[k] >= 0) rel += w[k] * positions[verts[k]];
    return normal.dot(rel) - thickness + offset;
}

double ContactConstraint::eval_gap_raw(const double* x, double thickness) const
{
    double w[4];
    weights(w);
    Vec3 rel = Vec3::Zero();
    for (int k = 0; k < 4; ++k)
        if (verts[k] >= 0) rel += w[k] * Eigen::Map<const Vec3>(x + 3 * verts[k]);
    return normal.dot(rel) - thickness + offset;
}

// --------------------------------------------------------------------------
// CollisionWorld

CollisionWorld::CollisionWorld(const TriangleMesh& mesh, CollisionParams params)
    : mesh_(&mesh), params_(params)
{
    if (params_.contact_radius <= 0) params_.contact_radius = 2.0 * params_.thickness;
    edges_ = mesh.edges();
    update(mesh.positions);
}

void CollisionWorld::update(const std::vector<Vec3>& x)
{
    std::vector<Aabb> tri_boxes(mesh_->triangle_count());
    for (int t = 0; t < mesh_->triangle_count(); ++t) {
        const Tri& tri = mesh_->triangles[t];
        Aabb box = Aabb::of_point(x[tri[0]]);
        box.grow(x[tri[1]]);
        box.grow(x[tri[2]]);
        tri_boxes[t] = box;
    }
    std::vector<Aabb> edge_boxes(edges_.size());
    for (size_t e = 0; e < edges_.size(); ++e) {
        Aabb box = Aabb::of_point(x[edges_[e].first]);
        box.grow(x[edges_[e].second]);
        edge_boxes[e] = box;
    }
    // Inflate by half the gather radius on each side so any pair within it
    // overlaps in the broad phase.
    const double r = 0.5 * (params_.contact_radius + params_.thickness);
    if (tri_bvh_.empty()) {
        tri_bvh_.build(tri_boxes, r);
        edge_bvh_.build(edge_boxes, r);
    } else {
        tri_bvh_.refit(tri_boxes);
        edge_bvh_.refit(edge_boxes);
    }
}

std::vector<ContactConstraint> CollisionWorld::detect(const std::vector<Vec3>& x,
                                                      double radius_override) const
{
    const double radius = radius_override > 0.0 ? radius_override : params_.contact_radius;
    const int nv = mesh_->vertex_count();

    // Vertex-triangle: query the triangle tree with each vertex box.
    std::vector<std::vector<ContactConstraint>> vt_found(static_cast<size_t>(nv));
    parallel_for(size_t(nv), [&](size_t vb, size_t ve) {
        std::vector<int> candidates;
        for (size_t v = vb; v < ve; ++v) {
            candidates.clear();
            Aabb box = Aabb::of_point(x[v]);
            box.inflate(0.5 * radius);
            tri_bvh_.query(box, candidates);
            std::sort(candidates.begin(), candidates.end());
            for (int t : candidates) {
                const Tri& tri = mesh_->triangles[t];
                if (tri[0] == static_cast<int>(v) || tri[1] == static_cast<int>(v) ||
                    tri[2] == static_cast<int>(v))
                    continue;
                double bc[3];
                const Vec3 witness =
                    closest_point_triangle(x[v], x[tri[0]], x[tri[1]], x[tri[2]], bc);
                const Vec3 rel = x[v] - witness;
                const double dist = rel.norm();
                if (dist >= radius) continue;

                ContactConstraint c;
                c.kind = ContactKind::VertexTriangle;
                c.a = static_cast<int>(v);
                c.b = t;
                c.verts[0] = static_cast<int>(v);
                c.verts[1] = tri[0];
                c.verts[2] = tri[1];
                c.verts[3] = tri[2];
                c.bary[0] = 1;
                c.bary[1] = bc[0];
                c.bary[2] = bc[1];
                c.bary[3] = bc[2];
                c.mu = params_.friction;
                const Vec3 tri_n = (x[tri[1]] - x[tri[0]]).cross(x[tri[2]] - x[tri[0]]);
                const double tn2 = tri_n.squaredNorm();
                const Vec3 n_tri = tn2 > kTiny ? Vec3(tri_n / std::sqrt(tn2)) : Vec3(0, 0, 1);
                const double side = n_tri.dot(rel);
                if (side >= 0.0) {
                    c.normal = dist > kTiny ? Vec3(rel / dist) : n_tri;
                    c.gap = dist - params_.thickness;
                } else {
                    // crossed through: fold the untangling direction into the
                    // frozen normal so the force restores the front side
                    c.normal = n_tri;
                    c.gap = side - params_.thickness;
                }
                vt_found[v].push_back(c);
            }
        }
    });

    // Edge-edge via self pairs on the edge tree.
    const auto edge_pairs = edge_bvh_.self_pairs();
    std::vector<std::vector<ContactConstraint>> ee_found(edge_pairs.size());
    parallel_for(edge_pairs.size(), [&](size_t pb, size_t pe) {
        for (size_t p = pb; p < pe; ++p) {
            const auto [ea, eb] = edge_pairs[p];
            const auto [a0, a1] = edges_[ea];
            const auto [b0, b1] = edges_[eb];
            if (a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1) continue;
            double s, t;
            const double dist = closest_segment_segment(x[a0], x[a1], x[b0], x[b1], s, t);
            if (dist >= radius) continue;
            const Vec3 wa = x[a0] + s * (x[a1] - x[a0]);
            const Vec3 wb = x[b0] + t * (x[b1] - x[b0]);
            ContactConstraint c;
            c.kind = ContactKind::EdgeEdge;
            c.a = static_cast<int>(ea);
            c.b = static_cast<int>(eb);
            c.verts[0] = a0;
            c.verts[1] = a1;
            c.verts[2] = b0;
            c.verts[3] = b1;
            c.bary[0] = 1 - s;
            c.bary[1] = s;
            c.bary[2] = 1 - t;
            c.bary[3] = t;
            c.mu = params_.friction;
            if (dist > kTiny) {
                c.normal = (wa - wb) / dist;
            } else {
                Vec3 n = (x[a1] - x[a0]).cross(x[b1] - x[b0]);
                c.normal = n.squaredNorm() > kTiny ? n.normalized() : Vec3(0, 0, 1);
            }
            c.gap = dist - params_.thickness;
            ee_found[p].push_back(c);
        }
    });

    std::vector<ContactConstraint> contacts;
    for (auto& list : vt_found)
        for (auto& c : list) contacts.push_back(c);
    for (auto& list : ee_found)
        for (auto& c : list) contacts.push_back(c);
    return contacts;
}

std::vector<ContactConstraint>
CollisionWorld::detect_environment(const std::vector<Vec3>& x, const Environment& env,
                                   double radius_override) const
{
    std::vector<ContactConstraint> contacts;
    const double radius = radius_override > 0.0 ? radius_override : params_.contact_radius;
    for (size_t p = 0; p < env.half_spaces.size(); ++p) {
        const HalfSpace& hs = env.half_spaces[p];
        for (int v = 0; v < mesh_->vertex_count(); ++v) {
            const double signed_dist = hs.normal.dot(x[v]) - hs.offset;
            if (signed_dist - params_.thickness >= radius) continue;
            ContactConstraint c;
            c.kind = ContactKind::Environment;
            c.a = v;
            c.b = static_cast<int>(p);
            c.verts[0] = v;
            c.normal = hs.normal;
            c.offset = -hs.offset;
            c.gap = signed_dist - params_.thickness;
            c.mu = env.friction;
            contacts.push_back(c);
        }
    }
    for (size_t p = 0; p < env.spheres.size(); ++p) {
        const SphereCollider& sp = env.spheres[p];
        for (int v = 0; v < mesh_->vertex_count(); ++v) {
            const Vec3 rel = x[v] - sp.center;
            const double dist = rel.norm();
            const double signed_dist = dist - sp.radius;
            if (signed_dist - params_.thickness >= radius) continue;
            ContactConstraint c;
            c.kind = ContactKind::Environment;
            c.a = v;
            c.b = static_cast<int>(env.half_spaces.size() + p);
            c.verts[0] = v;
            c.normal = dist > kTiny ? Vec3(rel / dist) : Vec3(0, 0, 1);
            // linearized: gap = n . x - (n . center + R) - thickness
            c.offset = -(c.normal.dot(sp.center) + sp.radius);
            c.gap = signed_dist - params_.thickness;
            c.mu = env.friction;
            contacts.push_back(c);
        }
    }
    return contacts;
}

// --------------------------------------------------------------------------
// potential, friction

double contact_energy(const std::vector<ContactConstraint>& contacts,
                      const std::vector<Vec3>& positions, double thickness,
                      const ContactForce& f)
{
    return ordered_sum(contacts.size(), [&](size_t b, size_t e) {
        double acc = 0.0;
        for (size_t i = b; i < e; ++i) {
            const double gap = contacts[i].eval_gap(positions, thickness);
            const double pen = f.activation - gap;
            if (pen > 0) acc += 0.5 * f.stiffness * pen * pen;
        }
        return acc;
    });
}

double contact_energy_raw(const std::vector<ContactConstraint>& contacts, const double* x,
                          double thickness, const ContactForce& f)
{
    return ordered_sum(contacts.size(), [&](size_t b, size_t e) {
        double acc = 0.0;
        for (size_t i = b; i < e; ++i) {
            const double gap = contacts[i].eval_gap_raw(x, thickness);
            const double pen = f.activation - gap;
            if (pen > 0) acc += 0.5 * f.stiffness * pen * pen;
        }
        return acc;
    });
}

void add_contact_gradient(const std::vector<ContactConstraint>& contacts,
                          const std::vector<Vec3>& positions, double thickness,
                          const ContactForce& f, VecX& grad)
{
    for (const ContactConstraint& c : contacts) {
        const double gap = c.eval_gap(positions, thickness);
        const double pen = f.activation - gap;
        if (pen <= 0) continue;
        double w[4];
        c.weights(w);
        const Vec3 dE = -f.stiffness * pen * c.normal; // dE/d(gap) * dgap/dx
        for (int k = 0; k < 4; ++k)
            if (c.verts[k] >= 0) grad.segment<3>(3 * c.verts[k]) += w[k] * dE;
    }
}

void add_friction_forces(const std::vector<ContactConstraint>& contacts,
                         const std::vector<Vec3>& positions, const VecX& velocity,
                         const std::vector<double>& vertex_mass, double thickness,
                         const ContactForce& f, double dt, VecX& force)
{
    for (const ContactConstraint& c : contacts) {
        if (c.mu <= 0) continue;
        const double gap = c.eval_gap(positions, thickness);
        const double pen = f.activation - gap;
        if (pen <= 0) continue;
        const double fn = f.stiffness * pen;

        double w[4];
        c.weights(w);
        Vec3 vrel = Vec3::Zero();
        double inv_mass_eff = 0.0;
        for (int k = 0; k < 4; ++k) {
            if (c.verts[k] < 0) continue;
            vrel += w[k] * velocity.segment<3>(3 * c.verts[k]);
            const double m = vertex_mass[c.verts[k]];
            if (m > 0) inv_mass_eff += w[k] * w[k] / m;
        }
        const Vec3 vt = vrel - c.normal.dot(vrel) * c.normal;
        const double speed = vt.norm();
        if (speed < kTiny || inv_mass_eff <= 0) continue;
        // Clamp to the force that would arrest tangential sliding in one step.
        const double arrest = speed / (dt * inv_mass_eff);
        const double mag = std::min(c.mu * fn, arrest);
        const Vec3 fr = -(mag / speed) * vt;
        for (int k = 0; k < 4; ++k)
            if (c.verts[k] >= 0) force.segment<3>(3 * c.verts[k]) += w[k] * fr;
    }
}

// --------------------------------------------------------------------------
// untangling

UntangleResult untangle(CollisionWorld& world, std::vector<Vec3>& positions,
                        const std::vector<double>& vertex_mass,
                        const std::vector<uint8_t>& anchored)
{
    const double thickness = world.params().thickness;
    const double deep = -0.5 * thickness;
    const double target_gap = 0.1 * thickness;
    UntangleResult result;

    // Vertex projections only: edge-edge proximity has no crossing sign, and
    // an unsigned correction would fight the restore-to-front projection of a
    // crossed vertex.
    for (int pass = 0; pass < 8; ++pass) {
        world.update(positions);
        const auto contacts = world.detect(positions);
        int corrected = 0;
        for (const ContactConstraint& c : contacts) {
            if (c.kind == ContactKind::EdgeEdge) continue;
            const double gap = c.eval_gap(positions, thickness);
            if (gap >= deep) continue;
            double w[4];
            c.weights(w);
            double denom = 0.0;
            for (int k = 0; k < 4; ++k) {
                if (c.verts[k] < 0) continue;
                if (anchored[c.verts[k]]) continue;
                const double m = vertex_mass[c.verts[k]];
                denom += w[k] * w[k] / std::max(m, kTiny);
            }
            if (denom <= 0) continue; // fully anchored pair
            const double delta = target_gap - gap;
            for (int k = 0; k < 4; ++k) {
                if (c.verts[k] < 0 || anchored[c.verts[k]]) continue;
                const double m = std::max(vertex_mass[c.verts[k]], kTiny);
                positions[c.verts[k]] += (w[k] / m / denom) * delta * c.normal;
            }
            ++corrected;
        }
        result.passes = pass + 1;
        result.resolved += corrected;
        if (corrected == 0) return result;
    }

    // Verify no deep vertex contact remains after the final pass.
    world.update(positions);
    for (const ContactConstraint& c : world.detect(positions))
        if (c.kind != ContactKind::EdgeEdge && c.eval_gap(positions, thickness) < deep)
            throw UntangleFailed("deep penetrations remain after 8 passes");
    return result;
}

} // namespace gdyn
