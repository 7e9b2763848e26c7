#include "gdyn/assets/material.hpp"

#include "gdyn/core/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace gdyn {

namespace {

struct PresetRow {
    const char* name;
    double stretch_g;   // g/s^2
    double bend_g;      // g*m^2/s^2/rad
    double density_g;   // g/m^2
    double thickness_mm;
};

// Measured fabric table; one stretch and one bending number per fabric, used
// for warp, weft and shear alike.
constexpr PresetRow kPresets[] = {
    {"cotton", 1000000.0, 2800.0, 170.0, 0.26},
    {"linen", 130000.0, 500.0, 71.0, 0.19},
    {"wool", 380000.0, 650.0, 220.0, 0.38},
    {"polyester", 100000.0, 1700.0, 109.0, 0.21},
    {"nylon", 65000.0, 100.0, 135.0, 0.32},
    {"silk", 30000.0, 150.0, 60.0, 0.19},
    {"knit", 25000.0, 200.0, 190.0, 0.5},
    {"velvet", 70000.0, 600.0, 210.0, 0.53},
    {"leather", 1000000.0, 20000.0, 500.0, 1.74},
    {"fur", 1700000.0, 2000.0, 230.3, 0.67},
};

constexpr double kDefaultFriction = 0.3;

Material from_row(const PresetRow& row)
{
    Material m;
    m.name = row.name;
    m.stretch_warp = row.stretch_g / 1000.0;
    m.stretch_weft = m.stretch_warp;
    m.stretch_shear = m.stretch_warp;
    m.bend_warp = row.bend_g / 1000.0;
    m.bend_weft = m.bend_warp;
    m.bend_quadratic = 0.0;
    m.area_density = row.density_g / 1000.0;
    m.thickness = row.thickness_mm / 1000.0;
    m.friction_coeff = kDefaultFriction;
    m.damping = 0.0;
    return m;
}

nlohmann::json to_json(const Material& m)
{
    return nlohmann::json{{"stretch_warp", m.stretch_warp},
                          {"stretch_weft", m.stretch_weft},
                          {"stretch_shear", m.stretch_shear},
                          {"bend_warp", m.bend_warp},
                          {"bend_weft", m.bend_weft},
                          {"bend_quadratic", m.bend_quadratic},
                          {"area_density", m.area_density},
                          {"thickness", m.thickness},
                          {"friction_coeff", m.friction_coeff},
                          {"damping", m.damping}};
}

Material from_json(const nlohmann::json& j, const std::string& name)
{
    Material m;
    m.name = name;
    m.stretch_warp = j.at("stretch_warp").get<double>();
    m.stretch_weft = j.value("stretch_weft", m.stretch_warp);
    m.stretch_shear = j.value("stretch_shear", m.stretch_warp);
    m.bend_warp = j.at("bend_warp").get<double>();
    m.bend_weft = j.value("bend_weft", m.bend_warp);
    m.bend_quadratic = j.value("bend_quadratic", 0.0);
    m.area_density = j.at("area_density").get<double>();
    m.thickness = j.at("thickness").get<double>();
    m.friction_coeff = j.value("friction_coeff", kDefaultFriction);
    m.damping = j.value("damping", 0.0);
    m.validate();
    return m;
}

} // namespace

void Material::validate() const
{
    if (stretch_warp < 0 || stretch_weft < 0 || stretch_shear < 0 || bend_warp < 0 ||
        bend_weft < 0 || bend_quadratic < 0)
        throw std::invalid_argument("material stiffnesses must be >= 0");
    if (!(area_density > 0)) throw std::invalid_argument("area_density must be > 0");
    if (!(thickness > 0)) throw std::invalid_argument("thickness must be > 0");
    if (friction_coeff < 0) throw std::invalid_argument("friction_coeff must be >= 0");
}

Material material_preset(const std::string& name)
{
    for (const PresetRow& row : kPresets)
        if (name == row.name) return from_row(row);
    throw UnknownPreset("unknown material preset: " + name);
}

std::vector<std::string> material_preset_names()
{
    std::vector<std::string> names;
    for (const PresetRow& row : kPresets) names.emplace_back(row.name);
    return names;
}

Material load_material_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MalformedAsset("cannot open material file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedAsset("bad material JSON: " + std::string(e.what()));
    }
    try {
        return from_json(j, path);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedAsset("bad material JSON: " + std::string(e.what()));
    }
}

void save_material_presets(const std::string& path)
{
    nlohmann::json j;
    for (const PresetRow& row : kPresets) j[row.name] = to_json(from_row(row));
    std::ofstream out(path);
    if (!out) throw MalformedAsset("cannot write material file: " + path);
    out << j.dump(2) << '\n';
}

} // namespace gdyn
