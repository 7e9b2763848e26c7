#include "gdyn/assets/mesh.hpp"

#include "gdyn/assets/material.hpp"
#include "gdyn/core/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gdyn {

namespace {
constexpr double kMinRestArea = 1e-12; // m^2

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

/// Rest-space coordinates of a triangle in a local orthonormal frame whose
/// +u axis is the given in-plane warp direction.
std::array<Vec2, 3> frame_from_axis(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                                    const Vec3& warp_axis)
{
    const Vec3 n = (p1 - p0).cross(p2 - p0).normalized();
    Vec3 u = warp_axis - warp_axis.dot(n) * n;
    if (u.squaredNorm() < 1e-24) u = p1 - p0; // axis normal to the plane
    u.normalize();
    const Vec3 v = n.cross(u);
    return {Vec2(0.0, 0.0), Vec2((p1 - p0).dot(u), (p1 - p0).dot(v)),
            Vec2((p2 - p0).dot(u), (p2 - p0).dot(v))};
}
} // namespace

double TriangleMesh::triangle_rest_area(int t) const
{
    const Tri& tri = triangles[t];
    return triangle_area(rest_positions[tri[0]], rest_positions[tri[1]], rest_positions[tri[2]]);
}

double TriangleMesh::total_rest_area() const
{
    double a = 0.0;
    for (int t = 0; t < triangle_count(); ++t) a += triangle_rest_area(t);
    return a;
}

Mat2 TriangleMesh::rest_shape(int t) const
{
    const auto& f = material_frames[t];
    Mat2 dm;
    dm.col(0) = f[1] - f[0];
    dm.col(1) = f[2] - f[0];
    return dm;
}

Vec3 TriangleMesh::triangle_normal(int t) const
{
    const Tri& tri = triangles[t];
    return (positions[tri[1]] - positions[tri[0]])
        .cross(positions[tri[2]] - positions[tri[0]])
        .normalized();
}

std::vector<std::pair<int, int>> TriangleMesh::edges() const
{
    std::vector<std::pair<int, int>> e;
    e.reserve(triangles.size() * 3);
    for (const Tri& tri : triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            e.emplace_back(a, b);
        }
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

void TriangleMesh::validate() const
{
    const int nv = vertex_count();
    for (int t = 0; t < triangle_count(); ++t) {
        for (int k = 0; k < 3; ++k)
            if (triangles[t][k] < 0 || triangles[t][k] >= nv)
                throw MalformedAsset("triangle index out of range");
        if (triangle_rest_area(t) <= kMinRestArea)
            throw DegenerateElement(t, "degenerate rest triangle");
        if (std::abs(rest_shape(t).determinant()) < 1e-18)
            throw DegenerateElement(t, "singular material frame");
    }
}

TriangleMesh load_obj(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MalformedAsset("cannot open OBJ file: " + path);

    std::vector<Vec3> vertices;
    std::vector<Vec2> uvs;
    std::vector<Tri> faces;
    std::vector<std::array<int, 3>> face_uvs;
    bool any_uv_face = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z()))
                throw MalformedAsset("bad vertex at line " + std::to_string(lineno));
            vertices.push_back(p);
        } else if (tag == "vt") {
            Vec2 t;
            if (!(ss >> t.x() >> t.y()))
                throw MalformedAsset("bad texcoord at line " + std::to_string(lineno));
            uvs.push_back(t);
        } else if (tag == "f") {
            std::vector<int> vi, ti;
            std::string tok;
            while (ss >> tok) {
                // v, v/t, v//n, v/t/n
                int v = 0, t = 0;
                const size_t s1 = tok.find('/');
                try {
                    v = std::stoi(tok.substr(0, s1));
                    if (s1 != std::string::npos) {
                        const size_t s2 = tok.find('/', s1 + 1);
                        const std::string tpart =
                            tok.substr(s1 + 1, s2 == std::string::npos ? s2 : s2 - s1 - 1);
                        if (!tpart.empty()) t = std::stoi(tpart);
                    }
                } catch (const std::exception&) {
                    throw MalformedAsset("bad face token at line " + std::to_string(lineno));
                }
                if (v < 0) v = static_cast<int>(vertices.size()) + v + 1;
                vi.push_back(v - 1);
                ti.push_back(t - 1);
            }
            if (vi.size() != 3)
                throw MalformedAsset("non-triangle face at line " + std::to_string(lineno));
            faces.push_back({vi[0], vi[1], vi[2]});
            face_uvs.push_back({ti[0], ti[1], ti[2]});
            if (ti[0] >= 0 && ti[1] >= 0 && ti[2] >= 0) any_uv_face = true;
        }
    }
    if (vertices.empty() || faces.empty()) throw MalformedAsset("OBJ has no triangles: " + path);

    TriangleMesh mesh;
    mesh.rest_positions = vertices;
    mesh.positions = vertices;
    mesh.triangles = faces;
    mesh.vertex_mass.assign(vertices.size(), 0.0);
    mesh.anchored.assign(vertices.size(), 0);
    mesh.material_frames.resize(faces.size());

    for (size_t f = 0; f < faces.size(); ++f) {
        const Tri& tri = faces[f];
        for (int k = 0; k < 3; ++k)
            if (tri[k] < 0 || tri[k] >= static_cast<int>(vertices.size()))
                throw MalformedAsset("face index out of range");
        const Vec3 &p0 = vertices[tri[0]], &p1 = vertices[tri[1]], &p2 = vertices[tri[2]];
        if (triangle_area(p0, p1, p2) <= kMinRestArea)
            throw DegenerateElement(static_cast<int>(f), "degenerate triangle in OBJ");

        Vec3 warp = p1 - p0; // default: first rest edge
        const auto& tuv = face_uvs[f];
        if (any_uv_face && tuv[0] >= 0 && tuv[1] >= 0 && tuv[2] >= 0 &&
            tuv[0] < static_cast<int>(uvs.size()) && tuv[1] < static_cast<int>(uvs.size()) &&
            tuv[2] < static_cast<int>(uvs.size())) {
            // Warp = direction of increasing u in the UV chart, mapped to 3D.
            const Vec2 duv1 = uvs[tuv[1]] - uvs[tuv[0]];
            const Vec2 duv2 = uvs[tuv[2]] - uvs[tuv[0]];
            const double det = duv1.x() * duv2.y() - duv1.y() * duv2.x();
            if (std::abs(det) > 1e-16) {
                const Vec3 du = (duv2.y() * (p1 - p0) - duv1.y() * (p2 - p0)) / det;
                if (du.squaredNorm() > 1e-24) warp = du;
            }
        }
        mesh.material_frames[f] = frame_from_axis(p0, p1, p2, warp);
    }
    mesh.validate();
    return mesh;
}

void save_obj(const std::vector<Vec3>& positions, const std::vector<Tri>& triangles,
              const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw MalformedAsset("cannot write OBJ file: " + path);
    char buf[128];
    for (const Vec3& p : positions) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    for (const Tri& t : triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void save_obj(const TriangleMesh& mesh, const std::string& path)
{
    save_obj(mesh.positions, mesh.triangles, path);
}

TriangleMesh make_grid(int nx, int ny, double width, double height)
{
    TriangleMesh mesh;
    const double dx = width / (nx - 1);
    const double dy = height / (ny - 1);
    mesh.rest_positions.reserve(size_t(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) mesh.rest_positions.emplace_back(i * dx, j * dy, 0.0);
    mesh.positions = mesh.rest_positions;

    auto vid = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    }
    mesh.material_frames.resize(mesh.triangles.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        // Grid warp axis = +x.
        mesh.material_frames[t] =
            frame_from_axis(mesh.rest_positions[tri[0]], mesh.rest_positions[tri[1]],
                            mesh.rest_positions[tri[2]], Vec3::UnitX());
    }
    mesh.vertex_mass.assign(mesh.rest_positions.size(), 0.0);
    mesh.anchored.assign(mesh.rest_positions.size(), 0);
    return mesh;
}

void assign_material(TriangleMesh& mesh, const Material& mat)
{
    mat.validate();
    mesh.vertex_mass.assign(mesh.rest_positions.size(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double m3 = mat.area_density * mesh.triangle_rest_area(t) / 3.0;
        for (int k = 0; k < 3; ++k) mesh.vertex_mass[mesh.triangles[t][k]] += m3;
    }
}

} // namespace gdyn
