#pragma once

#include <array>

namespace nodalforge {

// Components of a tangent vector or covector in some fixed frame.
using Vec2d = std::array<double, 2>;
using Vec3d = std::array<double, 3>;

}  // namespace nodalforge
