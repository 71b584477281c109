#include "bvc/grid.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bvc/scene.h" // ParseError

namespace bvc {

namespace {

std::string formatDouble(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void saveGridCsv(const GridField& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open grid file for writing: " + path);
    out << "x,y,value,valid\n";
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            Vector2 p = grid.point(ix, iy);
            out << formatDouble(p.x()) << ',' << formatDouble(p.y()) << ','
                << formatDouble(grid.at(ix, iy)) << ',' << (grid.validAt(ix, iy) ? 1 : 0) << '\n';
        }
    }
    if (!out) throw ParseError("failed writing grid file: " + path);
}

GridField loadGridCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "x,y,value,valid")
        throw ParseError(path + ": expected header x,y,value,valid");
    std::vector<double> xs, ys, vals;
    std::vector<char> valids;
    int lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        double x, y, v;
        int ok;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &x, &y, &v, &ok) != 4)
            throw ParseError(path + ":" + std::to_string(lineNo) + ": malformed grid row");
        xs.push_back(x);
        ys.push_back(y);
        vals.push_back(v);
        valids.push_back(ok != 0);
    }
    if (xs.empty()) throw ParseError(path + ": empty grid");

    size_t nx = 1;
    while (nx < ys.size() && ys[nx] == ys[0]) ++nx;
    if (xs.size() % nx != 0) throw ParseError(path + ": rows do not form a rectangular lattice");
    size_t ny = xs.size() / nx;
    double spacing = nx > 1 ? xs[1] - xs[0] : (ny > 1 ? ys[nx] - ys[0] : 1.0);
    if (!(spacing > 0.0)) throw ParseError(path + ": non-positive grid spacing");

    GridField grid = GridField::make(Vector2(xs[0], ys[0]), spacing, static_cast<int>(nx),
                                     static_cast<int>(ny));
    double tol = 1e-9 * std::max(1.0, std::abs(spacing) * std::max(nx, ny));
    for (size_t iy = 0; iy < ny; ++iy) {
        for (size_t ix = 0; ix < nx; ++ix) {
            size_t row = iy * nx + ix;
            Vector2 expect = grid.point(static_cast<int>(ix), static_cast<int>(iy));
            if (std::abs(xs[row] - expect.x()) > tol || std::abs(ys[row] - expect.y()) > tol)
                throw ParseError(path + ": rows are not a regular row-major lattice");
            grid.values[row] = vals[row];
            grid.valid[row] = valids[row];
        }
    }
    return grid;
}

double rmse(const GridField& a, const GridField& b) {
    if (a.nx != b.nx || a.ny != b.ny || std::abs(a.spacing - b.spacing) > 1e-9 ||
        (a.origin - b.origin).norm() > 1e-9)
        throw ParseError("rmse: grid layouts do not match");
    double sum = 0.0;
    long n = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        if (!a.valid[i] || !b.valid[i]) continue;
        double d = a.values[i] - b.values[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw ParseError("rmse: no jointly valid nodes");
    return std::sqrt(sum / n);
}

} // namespace bvc
