#include "gdyn/assets/point_cloud.hpp"

#include "gdyn/core/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gdyn {

namespace {

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PointCloudFrame load_xyz(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MalformedAsset("cannot open cloud file: " + path);
    PointCloudFrame frame;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Vec3 p;
        if (!(ss >> p.x() >> p.y() >> p.z()))
            throw MalformedAsset("bad XYZ line " + std::to_string(lineno) + " in " + path);
        frame.points.push_back(p);
    }
    return frame;
}

PointCloudFrame load_ply(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MalformedAsset("cannot open cloud file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw MalformedAsset("not a PLY file: " + path);

    size_t n_vertices = 0;
    bool ascii = false;
    bool in_vertex_element = false;
    std::vector<std::string> vertex_props;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            ascii = (fmt == "ascii");
        } else if (tag == "element") {
            std::string kind;
            size_t count = 0;
            ss >> kind >> count;
            in_vertex_element = (kind == "vertex");
            if (in_vertex_element) n_vertices = count;
        } else if (tag == "property" && in_vertex_element) {
            std::string type, name;
            ss >> type >> name;
            vertex_props.push_back(name);
        } else if (tag == "end_header") {
            break;
        }
    }
    if (!ascii) throw MalformedAsset("binary PLY is not supported: " + path);
    int ix = -1, iy = -1, iz = -1;
    for (size_t i = 0; i < vertex_props.size(); ++i) {
        if (vertex_props[i] == "x") ix = static_cast<int>(i);
        if (vertex_props[i] == "y") iy = static_cast<int>(i);
        if (vertex_props[i] == "z") iz = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0) throw MalformedAsset("PLY lacks x/y/z properties: " + path);

    PointCloudFrame frame;
    frame.points.reserve(n_vertices);
    std::vector<double> row(vertex_props.size());
    for (size_t v = 0; v < n_vertices; ++v) {
        if (!std::getline(in, line)) throw MalformedAsset("truncated PLY: " + path);
        std::istringstream ss(line);
        for (double& value : row)
            if (!(ss >> value)) throw MalformedAsset("bad PLY vertex row in " + path);
        frame.points.emplace_back(row[ix], row[iy], row[iz]);
    }
    return frame;
}

} // namespace

PointCloudFrame load_point_cloud(const std::string& path)
{
    if (ends_with(path, ".ply")) return load_ply(path);
    return load_xyz(path);
}

void save_point_cloud(const PointCloudFrame& cloud, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw MalformedAsset("cannot write cloud file: " + path);
    char buf[160];
    if (ends_with(path, ".ply")) {
        out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
            << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    }
    for (const Vec3& p : cloud.points) {
        std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g\n", p.x(), p.y(), p.z());
        out << buf;
    }
}

std::vector<PointCloudFrame> load_cloud_stream(const std::string& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) throw MalformedAsset("cannot open stream manifest: " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedAsset("bad stream manifest: " + std::string(e.what()));
    }
    if (!j.is_array()) throw MalformedAsset("stream manifest must be a JSON array");

    const auto dir = std::filesystem::path(manifest_path).parent_path();
    std::vector<PointCloudFrame> frames;
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& entry : j) {
        PointCloudFrame f = load_point_cloud((dir / entry.at("path").get<std::string>()).string());
        f.timestamp = entry.at("time").get<double>();
        if (!(f.timestamp > prev))
            throw MalformedAsset("stream timestamps must be strictly increasing");
        prev = f.timestamp;
        frames.push_back(std::move(f));
    }
    return frames;
}

void save_cloud_stream(const std::vector<PointCloudFrame>& frames, const std::string& dir,
                       const std::string& manifest_name)
{
    std::filesystem::create_directories(dir);
    nlohmann::json j = nlohmann::json::array();
    char name[64];
    for (size_t i = 0; i < frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%05zu.xyz", i);
        save_point_cloud(frames[i], (std::filesystem::path(dir) / name).string());
        j.push_back({{"time", frames[i].timestamp}, {"path", name}});
    }
    std::ofstream out(std::filesystem::path(dir) / manifest_name);
    out << j.dump(2) << '\n';
}

} // namespace gdyn
