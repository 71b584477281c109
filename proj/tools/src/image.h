#pragma once

#include <string>

#include "bvc/grid.h"

namespace bvc::cli {

// 8-bit binary PGM of the grid values mapped linearly over [lo, hi]; invalid
// cells render black. A "<path>.txt" sidecar documents the mapping. With
// autoRange the range is the min/max over valid cells.
void saveGridImage(const GridField& grid, const std::string& path, bool autoRange, double lo,
                   double hi);

} // namespace bvc::cli
