#include "bvc/problems.h"

#include <array>
#include <cmath>
#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace bvc {

Scene makeCircleScene(const Vector2& center, double radius, int segments, BoundaryLabel label,
                      bool ccw) {
    std::vector<Vector2> verts;
    std::vector<SegmentSpec> specs;
    verts.reserve(segments);
    for (int k = 0; k < segments; ++k) {
        double a = 2.0 * Pi * k / segments * (ccw ? 1.0 : -1.0);
        verts.push_back(center + radius * Vector2(std::cos(a), std::sin(a)));
    }
    for (int k = 0; k < segments; ++k) specs.push_back({k, (k + 1) % segments, label});
    return Scene::build(std::move(verts), specs);
}

Scene makeRectangleScene(const Vector2& lo, const Vector2& hi,
                         const std::array<BoundaryLabel, 4>& sides) {
    std::vector<Vector2> verts = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
    std::vector<SegmentSpec> specs;
    for (int k = 0; k < 4; ++k) specs.push_back({k, (k + 1) % 4, sides[k]});
    return Scene::build(std::move(verts), specs);
}

Scene makeAnnulusScene(const Vector2& center, double innerRadius, double outerRadius,
                       int segments) {
    std::vector<Vector2> verts;
    std::vector<SegmentSpec> specs;
    for (int k = 0; k < segments; ++k) { // outer loop counterclockwise
        double a = 2.0 * Pi * k / segments;
        verts.push_back(center + outerRadius * Vector2(std::cos(a), std::sin(a)));
    }
    for (int k = 0; k < segments; ++k)
        specs.push_back({k, (k + 1) % segments, BoundaryLabel::Dirichlet});
    int base = segments;
    for (int k = 0; k < segments; ++k) { // inner hole clockwise
        double a = -2.0 * Pi * k / segments;
        verts.push_back(center + innerRadius * Vector2(std::cos(a), std::sin(a)));
    }
    for (int k = 0; k < segments; ++k)
        specs.push_back({base + k, base + (k + 1) % segments, BoundaryLabel::Dirichlet});
    return Scene::build(std::move(verts), specs);
}

namespace {

constexpr int kCircleSegments = 256;

// shares the per-segment normals with the data callbacks without copying the scene
std::shared_ptr<std::vector<Vector2>> segmentNormals(const Scene& scene) {
    auto normals = std::make_shared<std::vector<Vector2>>();
    normals->reserve(scene.segments.size());
    for (const auto& s : scene.segments) normals->push_back(s.normal);
    return normals;
}

AnalyticProblem diskLinear() {
    AnalyticProblem ap;
    ap.name = "disk-linear";
    ap.scene = makeCircleScene(Vector2::Zero(), 1.0, kCircleSegments, BoundaryLabel::Dirichlet);
    ap.problem.kernel = KernelSpec::poisson(2);
    ap.problem.g = [](const Vector2& p, int) { return p.x(); };
    ap.exactU = [](const Vector2& p) { return p.x(); };
    ap.exactGradient = [](const Vector2&) { return Vector2(1.0, 0.0); };
    auto normals = segmentNormals(ap.scene);
    ap.exactNormalDerivative = [normals](const Vector2&, int seg) { return (*normals)[seg].x(); };
    return ap;
}

AnalyticProblem diskPoisson() {
    AnalyticProblem ap;
    ap.name = "disk-poisson";
    ap.scene = makeCircleScene(Vector2::Zero(), 1.0, kCircleSegments, BoundaryLabel::Dirichlet);
    ap.problem.kernel = KernelSpec::poisson(2);
    ap.problem.f = [](const Vector2&) { return 1.0; };
    ap.problem.g = [](const Vector2& p, int) { return 0.25 * (p.squaredNorm() - 1.0); };
    ap.exactU = [](const Vector2& p) { return 0.25 * (p.squaredNorm() - 1.0); };
    ap.exactGradient = [](const Vector2& p) { return Vector2(0.5 * p); };
    auto normals = segmentNormals(ap.scene);
    ap.exactNormalDerivative = [normals](const Vector2& p, int seg) {
        return 0.5 * p.dot((*normals)[seg]);
    };
    return ap;
}

AnalyticProblem squareMixedLinear() {
    AnalyticProblem ap;
    ap.name = "square-mixed-linear";
    // Dirichlet on the x = 0 and x = 1 sides, Neumann (h = 0) on y = 0 and y = 1
    ap.scene = makeRectangleScene(Vector2(0.0, 0.0), Vector2(1.0, 1.0),
                                  {BoundaryLabel::Neumann, BoundaryLabel::Dirichlet,
                                   BoundaryLabel::Neumann, BoundaryLabel::Dirichlet});
    ap.problem.kernel = KernelSpec::poisson(2);
    ap.problem.g = [](const Vector2& p, int) { return p.x(); };
    ap.exactU = [](const Vector2& p) { return p.x(); };
    ap.exactGradient = [](const Vector2&) { return Vector2(1.0, 0.0); };
    auto normals = segmentNormals(ap.scene);
    ap.exactNormalDerivative = [normals](const Vector2&, int seg) { return (*normals)[seg].x(); };
    return ap;
}

AnalyticProblem screenedConstant() {
    AnalyticProblem ap;
    ap.name = "screened-constant";
    double sigma = 2.0;
    ap.scene = makeRectangleScene(Vector2(0.0, 0.0), Vector2(1.0, 1.0),
                                  {BoundaryLabel::Dirichlet, BoundaryLabel::Dirichlet,
                                   BoundaryLabel::Dirichlet, BoundaryLabel::Dirichlet});
    ap.problem.kernel = KernelSpec::screened(sigma, 2);
    ap.problem.g = [](const Vector2&, int) { return 1.0; };
    ap.problem.f = [sigma](const Vector2&) { return -sigma; };
    ap.exactU = [](const Vector2&) { return 1.0; };
    ap.exactGradient = [](const Vector2&) { return Vector2::Zero(); };
    ap.exactNormalDerivative = [](const Vector2&, int) { return 0.0; };
    return ap;
}

AnalyticProblem annulusLog() {
    AnalyticProblem ap;
    ap.name = "annulus-log";
    ap.scene = makeAnnulusScene(Vector2::Zero(), 1.0, std::exp(1.0), kCircleSegments);
    ap.problem.kernel = KernelSpec::poisson(2);
    ap.problem.g = [](const Vector2& p, int) { return std::log(p.norm()); };
    ap.exactU = [](const Vector2& p) { return std::log(p.norm()); };
    ap.exactGradient = [](const Vector2& p) { return Vector2(p / p.squaredNorm()); };
    auto normals = segmentNormals(ap.scene);
    ap.exactNormalDerivative = [normals](const Vector2& p, int seg) {
        return p.dot((*normals)[seg]) / p.squaredNorm();
    };
    return ap;
}

} // namespace

const std::vector<std::string>& analyticProblemNames() {
    static const std::vector<std::string> names = {
        "disk-linear", "disk-poisson", "square-mixed-linear", "screened-constant", "annulus-log"};
    return names;
}

AnalyticProblem analyticProblem(const std::string& name) {
    if (name == "disk-linear") return diskLinear();
    if (name == "disk-poisson") return diskPoisson();
    if (name == "square-mixed-linear") return squareMixedLinear();
    if (name == "screened-constant") return screenedConstant();
    if (name == "annulus-log") return annulusLog();
    throw ParseError("unknown analytic problem: " + name);
}

GridField fdReference(const Scene& scene, const PdeProblem& problem, double hgrid) {
    if (!(hgrid > 0.0)) throw std::invalid_argument("fd reference: grid spacing must be positive");
    double tol = 1e-9 * std::max(scene.diagonal, 1.0);
    for (const auto& s : scene.segments) {
        if (s.label != BoundaryLabel::Dirichlet)
            throw ParseError("fd reference: scene must be all-Dirichlet");
        Vector2 a = scene.vertices[s.a], b = scene.vertices[s.b];
        bool onEdge = std::abs(a.x() - b.x()) < tol || std::abs(a.y() - b.y()) < tol;
        bool onBox = false;
        for (double c : {scene.bounds.lo.x(), scene.bounds.hi.x()})
            if (std::abs(a.x() - c) < tol && std::abs(b.x() - c) < tol) onBox = true;
        for (double c : {scene.bounds.lo.y(), scene.bounds.hi.y()})
            if (std::abs(a.y() - c) < tol && std::abs(b.y() - c) < tol) onBox = true;
        if (!onEdge || !onBox) throw ParseError("fd reference: scene is not an aligned rectangle");
    }
    Vector2 lo = scene.bounds.lo, extent = scene.bounds.hi - scene.bounds.lo;
    double fx = extent.x() / hgrid, fy = extent.y() / hgrid;
    int nx = static_cast<int>(std::lround(fx)) + 1;
    int ny = static_cast<int>(std::lround(fy)) + 1;
    if (std::abs(fx - std::round(fx)) > 1e-6 || std::abs(fy - std::round(fy)) > 1e-6)
        throw std::invalid_argument("fd reference: spacing must divide the rectangle");

    GridField grid = GridField::make(lo, hgrid, nx, ny);
    double sigma = problem.kernel.kind == KernelKind::ScreenedPoisson ? problem.kernel.sigma : 0.0;
    auto boundaryValue = [&](const Vector2& p) {
        ClosestPointResult cp = scene.closestPoint(p);
        return problem.g ? problem.g(cp.point, cp.segment) : 0.0;
    };

    std::vector<int> unknown(grid.values.size(), -1);
    int count = 0;
    for (int iy = 1; iy + 1 < ny; ++iy)
        for (int ix = 1; ix + 1 < nx; ++ix) unknown[grid.index(ix, iy)] = count++;

    // rows scaled by h^2 so the absolute residual target is well-conditioned
    double h2 = hgrid * hgrid;
    Eigen::SparseMatrix<double> A(count, count);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(count);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(count) * 5);
    for (int iy = 1; iy + 1 < ny; ++iy) {
        for (int ix = 1; ix + 1 < nx; ++ix) {
            int row = unknown[grid.index(ix, iy)];
            trips.push_back({row, row, 4.0 + sigma * h2});
            double rhs = problem.f ? -h2 * problem.f(grid.point(ix, iy)) : 0.0;
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                int jx = ix + dx[k], jy = iy + dy[k];
                int col = unknown[grid.index(jx, jy)];
                if (col >= 0)
                    trips.push_back({row, col, -1.0});
                else
                    rhs += boundaryValue(grid.point(jx, jy));
            }
            b[row] = rhs;
        }
    }
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd u;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20000);
    cg.compute(A);
    u = cg.solve(b);
    if ((A * u - b).norm() > 1e-10) { // direct fallback when CG stalls
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        u = ldlt.solve(b);
        if (ldlt.info() != Eigen::Success || (A * u - b).norm() > 1e-10)
            throw SolverError("fd reference: linear solve failed to reach the residual target");
    }

    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            int id = unknown[grid.index(ix, iy)];
            grid.at(ix, iy) = id >= 0 ? u[id] : boundaryValue(grid.point(ix, iy));
        }
    return grid;
}

double denseBieQuadrature(const Scene& loops, const KernelSpec& kernel,
                          const std::function<double(const Vector2&)>& u,
                          const std::function<double(const Vector2&, int)>& dudn,
                          const Vector2& x, int minNodes) {
    double total = 0.0;
    for (size_t sid = 0; sid < loops.segments.size(); ++sid) {
        const Segment& s = loops.segments[sid];
        int k = std::max(1, static_cast<int>(std::ceil(minNodes * s.length / loops.totalLength)));
        Vector2 a = loops.vertices[s.a], b = loops.vertices[s.b];
        double dz = s.length / k;
        for (int j = 0; j < k; ++j) {
            Vector2 z = a + (j + 0.5) / k * (b - a);
            total += (poissonKernelFree(kernel, x, z, s.normal) * u(z) -
                      greensFree(kernel, x, z) * dudn(z, static_cast<int>(sid))) *
                     dz;
        }
    }
    return total;
}

Vector2 denseBieGradientQuadrature(const Scene& loops, const KernelSpec& kernel,
                                   const std::function<double(const Vector2&)>& u,
                                   const std::function<double(const Vector2&, int)>& dudn,
                                   const Vector2& x, int minNodes) {
    Vector2 total = Vector2::Zero();
    for (size_t sid = 0; sid < loops.segments.size(); ++sid) {
        const Segment& s = loops.segments[sid];
        int k = std::max(1, static_cast<int>(std::ceil(minNodes * s.length / loops.totalLength)));
        Vector2 a = loops.vertices[s.a], b = loops.vertices[s.b];
        double dz = s.length / k;
        for (int j = 0; j < k; ++j) {
            Vector2 z = a + (j + 0.5) / k * (b - a);
            total += (poissonKernelGradient(kernel, x, z, s.normal) * u(z) -
                      greensFreeGradient(kernel, x, z) * dudn(z, static_cast<int>(sid))) *
                     dz;
        }
    }
    return total;
}

double denseBieQuadratureCircle(const Vector2& center, double radius, const KernelSpec& kernel,
                                const std::function<double(const Vector2&)>& u,
                                const std::function<double(const Vector2&)>& dudn,
                                const Vector2& x, int nodes) {
    double total = 0.0, dz = 2.0 * Pi * radius / nodes;
    for (int j = 0; j < nodes; ++j) {
        double a = 2.0 * Pi * (j + 0.5) / nodes;
        Vector2 n(std::cos(a), std::sin(a));
        Vector2 z = center + radius * n;
        total += (poissonKernelFree(kernel, x, z, n) * u(z) - greensFree(kernel, x, z) * dudn(z)) *
                 dz;
    }
    return total;
}

} // namespace bvc
