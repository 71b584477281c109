#pragma once

#include <functional>

#include "bvc/kernels.h"
#include "bvc/rng.h"
#include "bvc/scene.h"

namespace bvc {

// raised on ill-posed solver inputs (point outside the domain, no Dirichlet
// boundary to terminate on, unsupported kernel dimension)
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Delta u - sigma u = f in the domain, u = g on the Dirichlet boundary,
// du/dn = h on the Neumann boundary; boundary data also receives the segment id
struct PdeProblem {
    KernelSpec kernel = KernelSpec::poisson(2);
    std::function<double(const Vector2&)> f;      // empty => zero source
    std::function<double(const Vector2&, int)> g; // Dirichlet data
    std::function<double(const Vector2&, int)> h; // Neumann data (empty => zero)

    bool hasSource() const { return static_cast<bool>(f); }
};

struct WalkConfig {
    double epsilon = 0.0; // absorbing-shell width; 0 => 0.001 x scene diagonal
    double rMin = 0.0;    // minimum star radius; 0 => epsilon
    int maxSteps = 10000;
    int nWalks = 128;
    uint64_t seed = 0;
    uint64_t stream = 0; // stream id separating concurrent estimates

    double resolvedEpsilon(const Scene& scene) const {
        return epsilon > 0.0 ? epsilon : 1e-3 * scene.diagonal;
    }
    double resolvedRMin(const Scene& scene) const {
        double eps = resolvedEpsilon(scene);
        double r = rMin > 0.0 ? rMin : eps;
        if (r > eps) throw std::invalid_argument("walk config: r_min must lie in (0, epsilon]");
        return r;
    }
};

struct ScalarEstimate {
    double mean = 0.0;
    double se = 0.0; // standard error of the mean
    long count = 0;
    long truncated = 0; // walks cut off at max_steps
};

struct VectorEstimate {
    Vector2 mean = Vector2::Zero();
    Vector2 se = Vector2::Zero(); // per-component standard error
    long count = 0;
    long truncated = 0;
};

// walk-on-spheres estimate of u(x); requires an all-Dirichlet scene
ScalarEstimate wosSolve(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                        const WalkConfig& cfg);

// walk-on-stars estimate of u(x) for mixed Dirichlet/Neumann scenes
ScalarEstimate wostSolve(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                         const WalkConfig& cfg);

// gradient estimate at x: sphere term (d/R) (z-x)/R u(z) on the first ball
// (radius = distance to the full boundary) plus the ball-kernel source term
VectorEstimate wostGradient(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                            const WalkConfig& cfg);

// n . wostGradient
ScalarEstimate wostNormalDerivative(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                                    const Vector2& n, const WalkConfig& cfg);

namespace detail {
// one recursive walk sample starting at x; exposed for the cache module, which
// drives walks with its own RNG streams and budgets
double walkSample(const Scene& scene, const PdeProblem& problem, Vector2 x, double eps,
                  double rMin, int maxSteps, Rng& rng, bool& truncated);
} // namespace detail

} // namespace bvc
