#pragma once

#include "gdyn/assets/mesh.hpp"
#include "gdyn/collision/bvh.hpp"
#include "gdyn/core/types.hpp"

#include <vector>

namespace gdyn {

enum class ContactKind { VertexTriangle, EdgeEdge, Environment };

/// One proximity/penetration event. The witness geometry (participating
/// vertices, barycentric weights, normal) is frozen at detection time; the
/// gap as a function of positions is then linear:
///   gap(x) = normal . (sum_k w_k x_k) - thickness + offset
/// with w = (+1, -b0, -b1, -b2) for vertex-triangle and
/// (+(1-s), +s, -(1-t), -t) for edge-edge.
struct ContactConstraint {
    ContactKind kind = ContactKind::VertexTriangle;
    int a = -1; // vertex id (VT/Env) or first edge id (EE)
    int b = -1; // triangle id (VT), second edge id (EE), env primitive id
    int verts[4] = {-1, -1, -1, -1};
    double bary[4] = {1, 0, 0, 0}; // per-primitive barycentric weights
    Vec3 normal{0, 0, 1};          // unit, direction of increasing gap
    double gap = 0.0;              // m, signed; negative = penetrating
    double mu = 0.0;
    double offset = 0.0; // constant part of the linearized gap

    /// Signed weights of the witness-difference function (see above).
    void weights(double w[4]) const;
    double eval_gap(const std::vector<Vec3>& positions, double thickness) const;
    double eval_gap_raw(const double* x, double thickness) const;
};

struct CollisionParams {
    double thickness = 0.0;
    double contact_radius = 0.0; // activation distance; default 2x thickness
    double friction = 0.0;
};

/// Analytic environment colliders (table plane, sphere grippers).
struct HalfSpace {
    Vec3 normal{0, 0, 1};
    double offset = 0.0; // plane: normal . p = offset
};
struct SphereCollider {
    Vec3 center{0, 0, 0};
    double radius = 0.0;
};
struct Environment {
    std::vector<HalfSpace> half_spaces;
    std::vector<SphereCollider> spheres;
    double friction = 0.5;
};

/// Edge list + acceleration structures for one mesh, reused across steps.
class CollisionWorld {
public:
    CollisionWorld(const TriangleMesh& mesh, CollisionParams params);

    void update(const std::vector<Vec3>& positions); // refit BVHs

    /// Proximity contacts: vertex-triangle and edge-edge pairs closer than
    /// contact_radius, excluding pairs sharing a vertex. A vertex behind a
    /// triangle (crossed through, by winding) reports a negative gap past
    /// -thickness and the intrinsic triangle normal. The solver gathers with
    /// radius = activation + thickness so the penalty turns on at zero force.
    std::vector<ContactConstraint> detect(const std::vector<Vec3>& positions,
                                          double radius_override = 0.0) const;

    std::vector<ContactConstraint> detect_environment(const std::vector<Vec3>& positions,
                                                      const Environment& env,
                                                      double radius_override = 0.0) const;

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const CollisionParams& params() const { return params_; }

private:
    const TriangleMesh* mesh_;
    CollisionParams params_;
    std::vector<std::pair<int, int>> edges_;
    Bvh tri_bvh_;
    Bvh edge_bvh_;
};

/// Quadratic one-sided penalty with activation distance d_hat:
/// E = (k/2) max(0, d_hat - gap)^2 per contact.
struct ContactForce {
    double stiffness = 0.0;  // k_contact
    double activation = 0.0; // d_hat
};

double contact_energy(const std::vector<ContactConstraint>& contacts,
                      const std::vector<Vec3>& positions, double thickness,
                      const ContactForce& f);
double contact_energy_raw(const std::vector<ContactConstraint>& contacts, const double* x,
                          double thickness, const ContactForce& f);
void add_contact_gradient(const std::vector<ContactConstraint>& contacts,
                          const std::vector<Vec3>& positions, double thickness,
                          const ContactForce& f, VecX& grad);

/// Explicit Coulomb friction from current velocities; returns forces to add
/// to the step's right-hand side only (keeps the system matrix SPD).
void add_friction_forces(const std::vector<ContactConstraint>& contacts,
                         const std::vector<Vec3>& positions, const VecX& velocity,
                         const std::vector<double>& vertex_mass, double thickness,
                         const ContactForce& f, double dt, VecX& force);

struct UntangleResult {
    int resolved = 0;
    int passes = 0;
};

/// Positional fail-safe: pairs closer than thickness/2 (or crossed through)
/// are projected apart along the contact normal to a gap of +0.1*thickness,
/// split by inverse mass. Throws UntangleFailed when 8 passes do not clear
/// every deep contact.
UntangleResult untangle(CollisionWorld& world, std::vector<Vec3>& positions,
                        const std::vector<double>& vertex_mass,
                        const std::vector<uint8_t>& anchored);

/// Closest-point helpers (exposed for tests).
Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                            double bary[3]);
double closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2,
                               double& s, double& t);

} // namespace gdyn
