#pragma once

#include "gdyn/core/types.hpp"

#include <string>
#include <vector>

namespace gdyn {

struct Material;

/// Garment geometry. Rest-space 2D coordinates per triangle corner define the
/// warp/weft material frame: warp = +u, weft = +v, in meters, so the rest
/// deformation map is the identity.
struct TriangleMesh {
    std::vector<Vec3> rest_positions;
    std::vector<Vec3> positions;
    std::vector<Tri> triangles;
    std::vector<std::array<Vec2, 3>> material_frames;
    std::vector<double> vertex_mass;
    std::vector<uint8_t> anchored;

    int vertex_count() const { return static_cast<int>(rest_positions.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    double triangle_rest_area(int t) const;
    double total_rest_area() const;

    /// Rest-space edge matrix [u1-u0, u2-u0] for triangle t.
    Mat2 rest_shape(int t) const;

    /// Unit geometric normal of triangle t at the current positions.
    Vec3 triangle_normal(int t) const;

    /// Unique undirected edges (i < j).
    std::vector<std::pair<int, int>> edges() const;

    void validate() const;
};

TriangleMesh load_obj(const std::string& path);
void save_obj(const TriangleMesh& mesh, const std::string& path);
void save_obj(const std::vector<Vec3>& positions, const std::vector<Tri>& triangles,
              const std::string& path);

/// Square cloth grid in the xy plane (z = 0), row-major vertices,
/// (nx-1)*(ny-1)*2 triangles with consistent +z winding.
TriangleMesh make_grid(int nx, int ny, double width, double height);

/// Lumped vertex masses: one third of each incident triangle's rest mass.
void assign_material(TriangleMesh& mesh, const Material& mat);

} // namespace gdyn
