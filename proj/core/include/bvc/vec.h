#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace bvc {

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;

constexpr double Inf = std::numeric_limits<double>::infinity();
constexpr double Pi = 3.14159265358979323846;

// 2D cross product (z component of the 3D cross)
inline double cross2(const Vector2& a, const Vector2& b) {
    return a.x() * b.y() - a.y() * b.x();
}

// rotates a segment direction onto the outward normal of a counterclockwise loop
inline Vector2 outwardNormal(const Vector2& dir) {
    return Vector2(dir.y(), -dir.x());
}

} // namespace bvc
