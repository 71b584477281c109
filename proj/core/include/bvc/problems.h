#pragma once

#include <array>
#include <string>
#include <vector>

#include "bvc/grid.h"
#include "bvc/pointwise.h"

namespace bvc {

// scene + boundary data + closed-form solution used by tests and studies
struct AnalyticProblem {
    std::string name;
    Scene scene;
    PdeProblem problem;
    std::function<double(const Vector2&)> exactU;
    std::function<Vector2(const Vector2&)> exactGradient;
    std::function<double(const Vector2&, int)> exactNormalDerivative; // (point, segment)
};

// registry: disk-linear, disk-poisson, square-mixed-linear, screened-constant,
// annulus-log; circles are polygonized with boundary data taken from the exact
// solution, so the closed forms solve the polygonized problems exactly
AnalyticProblem analyticProblem(const std::string& name);
const std::vector<std::string>& analyticProblemNames();

// scene builders shared by the registry, tests, and benchmarks
Scene makeCircleScene(const Vector2& center, double radius, int segments, BoundaryLabel label,
                      bool ccw = true);
// sides ordered bottom, right, top, left
Scene makeRectangleScene(const Vector2& lo, const Vector2& hi,
                         const std::array<BoundaryLabel, 4>& sides);
Scene makeAnnulusScene(const Vector2& center, double innerRadius, double outerRadius,
                       int segments);

// 5-point finite-difference reference on an axis-aligned all-Dirichlet
// rectangle; boundary nodes carry g, interior solved to residual <= 1e-10
GridField fdReference(const Scene& scene, const PdeProblem& problem, double hgrid);

// composite midpoint quadrature of the boundary-integral identity with exact
// data; deterministic oracle for the splat operations
double denseBieQuadrature(const Scene& loops, const KernelSpec& kernel,
                          const std::function<double(const Vector2&)>& u,
                          const std::function<double(const Vector2&, int)>& dudn,
                          const Vector2& x, int minNodes = 1 << 16);
Vector2 denseBieGradientQuadrature(const Scene& loops, const KernelSpec& kernel,
                                   const std::function<double(const Vector2&)>& u,
                                   const std::function<double(const Vector2&, int)>& dudn,
                                   const Vector2& x, int minNodes = 1 << 16);

// same quadratures on an exact circle (no polygonization error)
double denseBieQuadratureCircle(const Vector2& center, double radius, const KernelSpec& kernel,
                                const std::function<double(const Vector2&)>& u,
                                const std::function<double(const Vector2&)>& dudn,
                                const Vector2& x, int nodes = 1 << 16);

} // namespace bvc
