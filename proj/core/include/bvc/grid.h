#pragma once

#include <string>
#include <vector>

#include "bvc/vec.h"

namespace bvc {

// rectangular lattice of values with a validity mask (row-major, y-rows)
struct GridField {
    Vector2 origin = Vector2::Zero();
    double spacing = 0.0;
    int nx = 0, ny = 0;
    std::vector<double> values;
    std::vector<char> valid;

    static GridField make(const Vector2& origin, double spacing, int nx, int ny) {
        GridField g;
        g.origin = origin;
        g.spacing = spacing;
        g.nx = nx;
        g.ny = ny;
        g.values.assign(static_cast<size_t>(nx) * ny, 0.0);
        g.valid.assign(static_cast<size_t>(nx) * ny, 1);
        return g;
    }
    size_t index(int ix, int iy) const { return static_cast<size_t>(iy) * nx + ix; }
    Vector2 point(int ix, int iy) const { return origin + spacing * Vector2(ix, iy); }
    double& at(int ix, int iy) { return values[index(ix, iy)]; }
    double at(int ix, int iy) const { return values[index(ix, iy)]; }
    bool validAt(int ix, int iy) const { return valid[index(ix, iy)] != 0; }
};

// CSV with header `x,y,value,valid`, 17 significant digits, row-major
void saveGridCsv(const GridField& grid, const std::string& path);
GridField loadGridCsv(const std::string& path);

// root-mean-square difference over jointly valid nodes; throws on grid mismatch
double rmse(const GridField& a, const GridField& b);

} // namespace bvc
