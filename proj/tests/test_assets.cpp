#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gdyn/assets/material.hpp"
#include "gdyn/assets/mesh.hpp"
#include "gdyn/assets/point_cloud.hpp"
#include "gdyn/core/errors.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>

using namespace gdyn;

namespace {
std::string write_temp(const std::string& name, const std::string& content)
{
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}
} // namespace

TEST_CASE("load_obj: single right triangle")
{
    const auto path = write_temp("tri.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const TriangleMesh mesh = load_obj(path);
    CHECK(mesh.vertex_count() == 3);
    CHECK(mesh.triangle_count() == 1);
    CHECK(mesh.triangle_rest_area(0) == doctest::Approx(0.5));
    CHECK(mesh.anchored == std::vector<uint8_t>{0, 0, 0});
    CHECK(mesh.vertex_mass == std::vector<double>{0, 0, 0});
}

TEST_CASE("load_obj: quad face rejected")
{
    const auto path =
        write_temp("quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    CHECK_THROWS_AS(load_obj(path), MalformedAsset);
}

TEST_CASE("load_obj: degenerate triangle rejected")
{
    const auto path = write_temp("degen.obj", "v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n");
    CHECK_THROWS_AS(load_obj(path), DegenerateElement);
}

TEST_CASE("load_obj: garbage rejected")
{
    const auto path = write_temp("garbage.obj", "v 0 zero 0\nf 1 2 3\n");
    CHECK_THROWS_AS(load_obj(path), MalformedAsset);
}

TEST_CASE("grid total area and obj round trip")
{
    const TriangleMesh grid = make_grid(3, 3, 1.0, 1.0); // 2x2 quads
    CHECK(grid.vertex_count() == 9);
    CHECK(grid.triangle_count() == 8);
    CHECK(grid.total_rest_area() == doctest::Approx(1.0).epsilon(1e-12));

    const auto path = (std::filesystem::temp_directory_path() / "grid.obj").string();
    save_obj(grid, path);
    const TriangleMesh loaded = load_obj(path);
    CHECK(loaded.vertex_count() == 9);
    CHECK(loaded.total_rest_area() == doctest::Approx(1.0).epsilon(1e-9));
    for (int v = 0; v < 9; ++v)
        CHECK((loaded.positions[v] - grid.positions[v]).norm() < 1e-8);
}

TEST_CASE("material frames are rest-isometric (zero rest strain)")
{
    const TriangleMesh grid = make_grid(4, 3, 0.7, 0.5);
    for (int t = 0; t < grid.triangle_count(); ++t) {
        const Mat2 dm = grid.rest_shape(t);
        CHECK(std::abs(dm.determinant()) > 1e-12);
        // frame coordinates reproduce 3D rest edge lengths
        const Tri& tri = grid.triangles[t];
        const auto& f = grid.material_frames[t];
        for (int k = 0; k < 3; ++k) {
            const double d3 =
                (grid.rest_positions[tri[k]] - grid.rest_positions[tri[(k + 1) % 3]]).norm();
            const double d2 = (f[k] - f[(k + 1) % 3]).norm();
            CHECK(d2 == doctest::Approx(d3).epsilon(1e-12));
        }
    }
}

TEST_CASE("load_obj uses UV warp axis when present")
{
    // UV u axis runs along +y of the 3D triangle
    const auto path = write_temp("uv.obj",
                                 "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
                                 "vt 0 0\nvt 0 1\nvt 1 0\n"
                                 "f 1/1 2/2 3/3\n");
    const TriangleMesh mesh = load_obj(path);
    // warp (frame u axis) should align with 3D direction of increasing u: +y
    const auto& f = mesh.material_frames[0];
    const Vec2 e02 = f[2] - f[0]; // 3D edge (0,1,0) mapped into the frame
    CHECK(std::abs(e02.x()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(e02.y()) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("assign_material lumps mass")
{
    TriangleMesh tri;
    tri.rest_positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    tri.positions = tri.rest_positions;
    tri.triangles = {{0, 1, 2}};
    tri.material_frames = {{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}};
    tri.vertex_mass = {0, 0, 0};
    tri.anchored = {0, 0, 0};

    const Material cotton = material_preset("cotton");
    assign_material(tri, cotton);
    for (int v = 0; v < 3; ++v)
        CHECK(tri.vertex_mass[v] == doctest::Approx(0.170 * 0.5 / 3.0).epsilon(1e-12));

    TriangleMesh grid = make_grid(3, 3, 1.0, 1.0);
    Material unit = cotton;
    unit.area_density = 1.0;
    assign_material(grid, unit);
    double total = 0;
    for (double m : grid.vertex_mass) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("material invariants reject bad values")
{
    Material m = material_preset("cotton");
    m.area_density = 0.0;
    CHECK_THROWS(m.validate());
}

TEST_CASE("presets: table values in SI")
{
    const Material cotton = material_preset("cotton");
    CHECK(cotton.stretch_warp == doctest::Approx(1000.0));
    CHECK(cotton.stretch_weft == cotton.stretch_warp);
    CHECK(cotton.bend_warp == doctest::Approx(2.8));
    CHECK(cotton.area_density == doctest::Approx(0.170));
    CHECK(cotton.thickness == doctest::Approx(0.00026));
    CHECK(cotton.bend_quadratic == 0.0);
    // unit conversion exactness
    CHECK(cotton.stretch_warp * 1000.0 == 1000000.0);

    const Material silk = material_preset("silk");
    CHECK(silk.stretch_warp == doctest::Approx(30.0));
    CHECK(silk.area_density == doctest::Approx(0.060));

    CHECK_THROWS_AS(material_preset("denim"), UnknownPreset);
    CHECK(material_preset_names().size() == 10);
}

TEST_CASE("shipped preset data file matches the built-ins")
{
    // repo data file, relative to the source tree
    const char* candidates[] = {"data/materials.json", "../data/materials.json",
                                "../../data/materials.json", "../../../data/materials.json"};
    std::string found;
    for (const char* c : candidates)
        if (std::filesystem::exists(c)) found = c;
    REQUIRE_FALSE(found.empty());

    std::ifstream in(found);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (const std::string& name : material_preset_names())
        CHECK(text.find("\"" + name + "\"") != std::string::npos);

    const auto tmp = std::filesystem::temp_directory_path() / "presets_regen.json";
    save_material_presets(tmp.string());
    std::ifstream regen(tmp);
    std::string regen_text((std::istreambuf_iterator<char>(regen)),
                           std::istreambuf_iterator<char>());
    CHECK(text == regen_text);
}

TEST_CASE("point cloud round trips at 1e-6 precision")
{
    auto gen = test::rng(21);
    PointCloudFrame frame;
    frame.points = test::random_cloud(gen, 100, 2.0);

    for (const char* ext : {"cloud.xyz", "cloud.ply"}) {
        const auto path = (std::filesystem::temp_directory_path() / ext).string();
        save_point_cloud(frame, path);
        const PointCloudFrame loaded = load_point_cloud(path);
        REQUIRE(loaded.points.size() == frame.points.size());
        for (size_t i = 0; i < frame.points.size(); ++i)
            CHECK((loaded.points[i] - frame.points[i]).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("empty cloud round trips")
{
    PointCloudFrame frame;
    const auto path = (std::filesystem::temp_directory_path() / "empty.ply").string();
    save_point_cloud(frame, path);
    CHECK(load_point_cloud(path).points.empty());
}

TEST_CASE("binary PLY rejected")
{
    const auto path = write_temp("bin.ply",
                                 "ply\nformat binary_little_endian 1.0\n"
                                 "element vertex 1\nproperty float x\nproperty float y\n"
                                 "property float z\nend_header\nxxx");
    CHECK_THROWS_AS(load_point_cloud(path), MalformedAsset);
}

TEST_CASE("cloud stream manifest round trip, timestamps increasing")
{
    auto gen = test::rng(22);
    std::vector<PointCloudFrame> frames(3);
    for (size_t f = 0; f < frames.size(); ++f) {
        frames[f].points = test::random_cloud(gen, 10);
        frames[f].timestamp = 0.1 * static_cast<double>(f);
    }
    const auto dir = (std::filesystem::temp_directory_path() / "stream_test").string();
    save_cloud_stream(frames, dir);
    const auto loaded = load_cloud_stream(dir + "/stream.json");
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[1].timestamp == doctest::Approx(0.1));

    // decreasing timestamps rejected
    std::swap(frames[0].timestamp, frames[2].timestamp);
    save_cloud_stream(frames, dir);
    CHECK_THROWS_AS(load_cloud_stream(dir + "/stream.json"), MalformedAsset);
}
