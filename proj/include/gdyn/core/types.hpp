#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <vector>

namespace gdyn {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

using Tri = std::array<int, 3>;

inline Eigen::Map<Vec3> vec3_at(VecX& x, int i) { return Eigen::Map<Vec3>(x.data() + 3 * i); }
inline Eigen::Map<const Vec3> vec3_at(const VecX& x, int i)
{
    return Eigen::Map<const Vec3>(x.data() + 3 * i);
}

inline VecX flatten(const std::vector<Vec3>& pts)
{
    VecX x(3 * static_cast<int>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) x.segment<3>(3 * i) = pts[i];
    return x;
}

inline std::vector<Vec3> unflatten(const VecX& x)
{
    std::vector<Vec3> pts(static_cast<size_t>(x.size() / 3));
    for (size_t i = 0; i < pts.size(); ++i) pts[i] = x.segment<3>(3 * i);
    return pts;
}

} // namespace gdyn
