#pragma once

#include <functional>
#include <string>

#include "bvc/vec.h"
#include "json.hpp"

namespace bvc::cli {

using ScalarField = std::function<double(const Vector2&)>;
using BoundaryField = std::function<double(const Vector2&, int)>;

// named parametric field builders; `path` prefixes validation error messages.
// names: constant, linear, radial, harmonic-poly, checkerboard, per-segment-constant
ScalarField makeScalarField(const nlohmann::json& spec, const std::string& path);
BoundaryField makeBoundaryField(const nlohmann::json& spec, const std::string& path);

} // namespace bvc::cli
