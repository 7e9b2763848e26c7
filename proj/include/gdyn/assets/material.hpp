#pragma once

#include <string>
#include <vector>

namespace gdyn {

/// Fabric parameters in SI units (kg, m, s, rad). Preset tables are measured
/// in g/s^2, g*m^2/s^2/rad, g/m^2 and mm and are converted on load.
struct Material {
    std::string name;
    double stretch_warp = 0.0;   // kg/s^2
    double stretch_weft = 0.0;   // kg/s^2
    double stretch_shear = 0.0;  // kg/s^2
    double bend_warp = 0.0;      // kg*m^2/s^2/rad
    double bend_weft = 0.0;      // kg*m^2/s^2/rad
    double bend_quadratic = 0.0; // quadratic bending resistance coefficient
    double area_density = 0.0;   // kg/m^2
    double thickness = 0.0;      // m
    double friction_coeff = 0.0; // dimensionless
    double damping = 0.0;        // 1/s

    void validate() const;
};

/// Built-in fabric presets: cotton, linen, wool, polyester, nylon, silk,
/// knit, velvet, leather, fur. Throws UnknownPreset otherwise.
Material material_preset(const std::string& name);

std::vector<std::string> material_preset_names();

/// Material from a JSON file ({"stretch_warp": ..., ...}, SI units).
Material load_material_file(const std::string& path);

/// Preset pack in the same JSON schema, one object per fabric name.
void save_material_presets(const std::string& path);

} // namespace gdyn
