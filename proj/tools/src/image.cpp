#include "image.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bvc::cli {

void saveGridImage(const GridField& grid, const std::string& path, bool autoRange, double lo,
                   double hi) {
    if (grid.nx < 1 || grid.ny < 1) throw std::runtime_error("image: empty grid");
    if (autoRange) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (int i = 0; i < grid.nx * grid.ny; ++i) {
            if (!grid.valid[i]) continue;
            lo = std::min(lo, grid.values[i]);
            hi = std::max(hi, grid.values[i]);
        }
        if (!(lo < hi)) { // constant or empty field: center it mid-gray
            double mid = std::isfinite(lo) ? lo : 0.0;
            lo = mid - 1.0;
            hi = mid + 1.0;
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("image: cannot write \"" + path + "\"");
    out << "P5\n" << grid.nx << " " << grid.ny << "\n255\n";
    for (int j = grid.ny - 1; j >= 0; --j) { // top image row = largest y
        for (int i = 0; i < grid.nx; ++i) {
            unsigned char px = 0;
            if (grid.valid[grid.index(i, j)]) {
                double t = (grid.values[grid.index(i, j)] - lo) / (hi - lo);
                px = (unsigned char)std::clamp(std::lround(t * 255.0), 0l, 255l);
            }
            out.put(char(px));
        }
    }
    if (!out) throw std::runtime_error("image: write failed for \"" + path + "\"");

    std::ofstream side(path + ".txt");
    if (!side) throw std::runtime_error("image: cannot write \"" + path + ".txt\"");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "min %.17g\nmax %.17g\n", lo, hi);
    side << buf << "pixels: linear map of the value range to 0..255\n"
         << "out-of-domain pixels: black\nrow order: top row is the largest y\n";
}

} // namespace bvc::cli
