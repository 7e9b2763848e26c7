#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gdyn/assets/material.hpp"
#include "gdyn/assets/mesh.hpp"
#include "gdyn/collision/bvh.hpp"
#include "gdyn/collision/contact.hpp"
#include "gdyn/core/errors.hpp"
#include "test_util.hpp"

#include <algorithm>

using namespace gdyn;

namespace {

std::vector<Aabb> random_triangle_boxes(std::mt19937_64& gen, int n, double size)
{
    std::vector<Aabb> boxes;
    for (int i = 0; i < n; ++i) {
        const Vec3 a = test::random_vec(gen);
        Aabb box = Aabb::of_point(a);
        box.grow(a + size * test::random_vec(gen).cwiseAbs());
        boxes.push_back(box);
    }
    return boxes;
}

std::vector<std::pair<int, int>> oracle_pairs(const std::vector<Aabb>& boxes, double inflation)
{
    std::vector<std::pair<int, int>> out;
    for (size_t i = 0; i < boxes.size(); ++i) {
        for (size_t j = i + 1; j < boxes.size(); ++j) {
            Aabb a = boxes[i], b = boxes[j];
            a.inflate(inflation);
            b.inflate(inflation);
            if (a.overlaps(b)) out.emplace_back(int(i), int(j));
        }
    }
    return out;
}

/// Flat two-layer mesh: a small patch hovering above a large patch, merged
/// into one mesh so self-collision paths are exercised.
TriangleMesh two_layer_mesh(double gap)
{
    TriangleMesh base = make_grid(4, 4, 0.3, 0.3);
    TriangleMesh top = make_grid(3, 3, 0.15, 0.15);
    TriangleMesh merged = base;
    const int off = base.vertex_count();
    for (int v = 0; v < top.vertex_count(); ++v) {
        Vec3 p = top.positions[v] + Vec3(0.07, 0.07, gap);
        merged.rest_positions.push_back(top.rest_positions[v] + Vec3(0.07, 0.07, gap));
        merged.positions.push_back(p);
        merged.vertex_mass.push_back(1.0);
        merged.anchored.push_back(0);
    }
    for (size_t t = 0; t < top.triangles.size(); ++t) {
        const Tri& tri = top.triangles[t];
        merged.triangles.push_back({tri[0] + off, tri[1] + off, tri[2] + off});
        merged.material_frames.push_back(top.material_frames[t]);
    }
    for (auto& m : merged.vertex_mass)
        if (m == 0.0) m = 1.0;
    return merged;
}

} // namespace

TEST_CASE("bvh: single primitive is a root leaf")
{
    Bvh bvh;
    bvh.build({Aabb{Vec3(0, 0, 0), Vec3(1, 1, 1)}}, 0.0);
    std::vector<int> hits;
    bvh.query(Aabb{Vec3(0.5, 0.5, 0.5), Vec3(0.6, 0.6, 0.6)}, hits);
    CHECK(hits == std::vector<int>{0});
    CHECK(bvh.self_pairs().empty());
}

TEST_CASE("bvh: self pairs equal the O(n^2) oracle exactly")
{
    auto gen = test::rng(41);
    for (int n : {50, 300, 1000}) {
        const auto boxes = random_triangle_boxes(gen, n, 0.15);
        const double inflation = 0.02;
        Bvh bvh;
        bvh.build(boxes, inflation);
        const auto pairs = bvh.self_pairs();
        const auto oracle = oracle_pairs(boxes, inflation);
        CHECK(pairs == oracle);
    }
}

TEST_CASE("bvh: refit query equals rebuild query after motion")
{
    auto gen = test::rng(42);
    auto boxes = random_triangle_boxes(gen, 400, 0.1);
    Bvh refitted;
    refitted.build(boxes, 0.01);
    for (Aabb& b : boxes) {
        const Vec3 d = 0.2 * test::random_vec(gen);
        b.lo += d;
        b.hi += d;
    }
    refitted.refit(boxes);
    Bvh rebuilt;
    rebuilt.build(boxes, 0.01);
    CHECK(refitted.self_pairs() == rebuilt.self_pairs());
    CHECK(refitted.self_pairs() == oracle_pairs(boxes, 0.01));
}

TEST_CASE("closest point on triangle: interior, edge, vertex regions")
{
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    double bc[3];
    Vec3 w = closest_point_triangle(Vec3(0.25, 0.25, 0.7), a, b, c, bc);
    CHECK((w - Vec3(0.25, 0.25, 0)).norm() < 1e-14);
    CHECK(bc[0] == doctest::Approx(0.5));

    w = closest_point_triangle(Vec3(2, -1, 0), a, b, c, bc);
    CHECK((w - b).norm() < 1e-14);

    w = closest_point_triangle(Vec3(0.5, -1, 0), a, b, c, bc);
    CHECK((w - Vec3(0.5, 0, 0)).norm() < 1e-14);
    CHECK(bc[2] == doctest::Approx(0.0));
}

TEST_CASE("segment-segment closest distance")
{
    double s, t;
    const double d = closest_segment_segment(Vec3(-1, 0, 0), Vec3(1, 0, 0), Vec3(0, -1, 0.3),
                                             Vec3(0, 1, 0.3), s, t);
    CHECK(d == doctest::Approx(0.3));
    CHECK(s == doctest::Approx(0.5));
    CHECK(t == doctest::Approx(0.5));
}

TEST_CASE("detect: distant parallel triangles produce nothing")
{
    TriangleMesh m;
    m.rest_positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                        Vec3(0, 0, 0.1), Vec3(1, 0, 0.1), Vec3(0, 1, 0.1)};
    m.positions = m.rest_positions;
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    m.material_frames.assign(2, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    m.vertex_mass.assign(6, 1.0);
    m.anchored.assign(6, 0);
    CollisionParams params;
    params.thickness = 0.26e-3;
    params.contact_radius = 1e-3;
    CollisionWorld world(m, params);
    CHECK(world.detect(m.positions).empty());
}

TEST_CASE("detect: vertex above triangle interior")
{
    TriangleMesh m;
    m.rest_positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.25, 0.25, 0.5e-3),
                        Vec3(1.25, 0.25, 0.5e-3), Vec3(0.25, 1.25, 0.5e-3)};
    m.positions = m.rest_positions;
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    m.material_frames.assign(2, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    m.vertex_mass.assign(6, 1.0);
    m.anchored.assign(6, 0);
    CollisionParams params;
    params.thickness = 0.26e-3;
    params.contact_radius = 1e-3;
    CollisionWorld world(m, params);
    const auto contacts = world.detect(m.positions);

    bool found = false;
    for (const ContactConstraint& c : contacts) {
        if (c.kind == ContactKind::VertexTriangle && c.a == 3 && c.b == 0) {
            found = true;
            CHECK(c.gap == doctest::Approx(0.24e-3).epsilon(1e-9));
            CHECK(c.normal.dot(Vec3(0, 0, 1)) == doctest::Approx(1.0));
            CHECK(c.bary[1] + c.bary[2] + c.bary[3] == doctest::Approx(1.0));
            for (int k = 1; k < 4; ++k) {
                CHECK(c.bary[k] >= 0.0);
                CHECK(c.bary[k] <= 1.0);
            }
        }
    }
    CHECK(found);
}

TEST_CASE("detect: crossed perpendicular edges at small separation")
{
    TriangleMesh m;
    const double sep = 0.4e-3;
    m.rest_positions = {Vec3(-1, 0, 0),   Vec3(1, 0, 0),   Vec3(0, -0.5, 2),
                        Vec3(0, -1, -sep), Vec3(0, 1, -sep), Vec3(2, 0.5, -2 - sep)};
    m.positions = m.rest_positions;
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    m.material_frames.assign(2, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    m.vertex_mass.assign(6, 1.0);
    m.anchored.assign(6, 0);
    CollisionParams params;
    params.thickness = 0.26e-3;
    params.contact_radius = 1e-3;
    CollisionWorld world(m, params);
    const auto contacts = world.detect(m.positions);
    bool found = false;
    for (const ContactConstraint& c : contacts) {
        if (c.kind != ContactKind::EdgeEdge) continue;
        if (c.gap == doctest::Approx(sep - 0.26e-3).epsilon(1e-6)) found = true;
    }
    CHECK(found);
}

TEST_CASE("contact potential: activation boundary and closed-form force")
{
    ContactConstraint c;
    c.kind = ContactKind::Environment;
    c.verts[0] = 0;
    c.normal = Vec3(0, 0, 1);
    c.offset = 0.0;

    ContactForce f;
    f.stiffness = 1e4;
    f.activation = 1e-3;

    std::vector<Vec3> pos = {Vec3(0, 0, 5e-3)};
    CHECK(contact_energy({c}, pos, 0.0, f) == 0.0);
    VecX grad = VecX::Zero(3);
    add_contact_gradient({c}, pos, 0.0, f, grad);
    CHECK(grad.norm() == 0.0);

    pos[0] = Vec3(0, 0, 0); // gap 0: force = k * activation = 10 N
    grad.setZero();
    add_contact_gradient({c}, pos, 0.0, f, grad);
    CHECK(grad.segment<3>(0).norm() == doctest::Approx(10.0));
    CHECK(grad[2] < 0.0); // energy decreases upward: force pushes +z

    pos[0] = Vec3(0, 0, 1e-3 - 1e-9); // C1: force -> 0 at activation
    grad.setZero();
    add_contact_gradient({c}, pos, 0.0, f, grad);
    CHECK(grad.norm() < 1e-4);
}

TEST_CASE("friction: coefficient zero kills tangential force, bound holds")
{
    ContactConstraint c;
    c.kind = ContactKind::Environment;
    c.verts[0] = 0;
    c.normal = Vec3(0, 0, 1);
    c.mu = 0.0;
    ContactForce f{1e4, 1e-3};
    std::vector<Vec3> pos = {Vec3(0, 0, 0)};
    VecX vel = VecX::Zero(3);
    vel[0] = 1.0;
    VecX force = VecX::Zero(3);
    add_friction_forces({c}, pos, vel, {1.0}, 0.0, f, 0.01, force);
    CHECK(force.norm() == 0.0);

    c.mu = 0.5;
    add_friction_forces({c}, pos, vel, {1.0}, 0.0, f, 0.01, force);
    CHECK(force[0] < 0.0);
    CHECK(std::abs(force[0]) <= 0.5 * 10.0 + 1e-12);
    CHECK(force[2] == 0.0);
}

TEST_CASE("cloth-cloth contact forces sum to zero")
{
    const TriangleMesh m = two_layer_mesh(0.3e-3);
    CollisionParams params;
    params.thickness = 0.26e-3;
    params.contact_radius = 1e-3;
    CollisionWorld world(m, params);
    const auto contacts = world.detect(m.positions);
    REQUIRE(!contacts.empty());
    ContactForce f{1e4, params.contact_radius};
    VecX grad = VecX::Zero(3 * m.vertex_count());
    add_contact_gradient(contacts, m.positions, params.thickness, f, grad);
    Vec3 total = Vec3::Zero();
    for (int v = 0; v < m.vertex_count(); ++v) total += grad.segment<3>(3 * v);
    CHECK(total.norm() < 1e-10);
}

TEST_CASE("untangle: no penetrations is the identity")
{
    TriangleMesh m = two_layer_mesh(0.5e-3);
    CollisionParams params;
    params.thickness = 0.26e-3;
    params.contact_radius = 0.5e-3;
    CollisionWorld world(m, params);
    auto positions = m.positions;
    const UntangleResult r = untangle(world, positions, m.vertex_mass, m.anchored);
    CHECK(r.resolved == 0);
    for (size_t v = 0; v < positions.size(); ++v)
        CHECK((positions[v] - m.positions[v]).norm() == 0.0);
}

TEST_CASE("untangle: vertex pushed through a large anchored triangle")
{
    TriangleMesh m;
    m.rest_positions = {Vec3(-5, -5, 0), Vec3(5, -5, 0), Vec3(0, 5, 0), Vec3(0, 0, -1e-3),
                        Vec3(8, 0, -1e-3), Vec3(8, 1, -1e-3)};
    m.positions = m.rest_positions;
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    m.material_frames.assign(2, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    m.vertex_mass = {1, 1, 1, 1, 1, 1};
    m.anchored = {1, 1, 1, 0, 1, 1};

    CollisionParams params;
    params.thickness = 4e-3;
    params.contact_radius = 8e-3;
    CollisionWorld world(m, params);
    auto positions = m.positions;
    const UntangleResult r = untangle(world, positions, m.vertex_mass, m.anchored);
    CHECK(r.resolved >= 1);
    CHECK(positions[3].z() > 0.0); // restored to the + side
    world.update(positions);
    for (const ContactConstraint& c : world.detect(positions))
        if (c.kind != ContactKind::EdgeEdge)
            CHECK(c.eval_gap(positions, params.thickness) >= -0.5 * params.thickness - 1e-12);
}

TEST_CASE("environment contacts: table half-space and sphere")
{
    TriangleMesh m = make_grid(2, 2, 0.1, 0.1);
    for (auto& p : m.positions) p.z() = 0.1e-3;
    CollisionParams params;
    params.thickness = 0.26e-3;
    params.contact_radius = 1e-3;
    CollisionWorld world(m, params);
    Environment env;
    env.half_spaces.push_back({Vec3(0, 0, 1), 0.0});
    env.spheres.push_back({Vec3(0.0, 0.0, -0.05), 0.0502});
    const auto contacts = world.detect_environment(m.positions, env);
    int plane_hits = 0, sphere_hits = 0;
    for (const ContactConstraint& c : contacts) {
        if (c.kind != ContactKind::Environment) continue;
        if (c.b == 0) {
            ++plane_hits;
            CHECK(c.gap == doctest::Approx(0.1e-3 - 0.26e-3));
        } else {
            ++sphere_hits;
        }
    }
    CHECK(plane_hits == 4);
    CHECK(sphere_hits > 0);
}
