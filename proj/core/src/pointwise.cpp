#include "bvc/pointwise.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bvc {

namespace {

struct WalkContext {
    const Scene& scene;
    const PdeProblem& problem;
    KernelSpec kernel;        // problem kernel with the scene scale applied
    KernelSpec poissonKernel; // matching Poisson kernel for source sampling
    double eps = 0.0, rMin = 0.0, tGuard = 0.0;
    int maxSteps = 0;
    bool hasNeumann = false, screened = false;
};

WalkContext makeContext(const Scene& scene, const PdeProblem& problem, const WalkConfig& cfg) {
    problem.kernel.validate();
    if (problem.kernel.dim != 2) throw SolverError("walk estimators support dim == 2 only");
    WalkContext ctx{scene, problem};
    ctx.kernel = problem.kernel;
    ctx.kernel.scale = scene.diagonal;
    ctx.poissonKernel = KernelSpec::poisson(2, scene.diagonal);
    ctx.eps = cfg.resolvedEpsilon(scene);
    ctx.rMin = cfg.resolvedRMin(scene);
    ctx.tGuard = 1e-9 * scene.diagonal;
    ctx.maxSteps = std::max(1, cfg.maxSteps);
    ctx.hasNeumann = scene.hasNeumann();
    ctx.screened = problem.kernel.kind == KernelKind::ScreenedPoisson;
    return ctx;
}

double dirichletValue(const WalkContext& ctx, const ClosestPointResult& cp) {
    return ctx.problem.g ? ctx.problem.g(cp.point, cp.segment) : 0.0;
}

// uniform direction on the circle, or on the half-circle around axis
Vector2 sampleDirection(Rng& rng, const Vector2* axis) {
    double theta;
    if (axis)
        theta = std::atan2(axis->y(), axis->x()) + rng.uniform(-0.5 * Pi, 0.5 * Pi);
    else
        theta = rng.uniform(0.0, 2.0 * Pi);
    return {std::cos(theta), std::sin(theta)};
}

// Neumann boundary clipped to the ball B(x, R)
struct NeumannClip {
    struct Piece {
        int segment = -1;
        double t0 = 0.0, t1 = 0.0, length = 0.0;
    };
    std::vector<Piece> pieces;
    double total = 0.0;
};

void clipNeumann(const WalkContext& ctx, const Vector2& x, double R, NeumannClip& clip) {
    clip.pieces.clear();
    clip.total = 0.0;
    const auto& segs = ctx.scene.segments;
    for (int id = 0; id < static_cast<int>(segs.size()); ++id) {
        const Segment& s = segs[id];
        if (s.label != BoundaryLabel::Neumann) continue;
        Vector2 a = ctx.scene.vertices[s.a];
        Vector2 u = ctx.scene.vertices[s.b] - a;
        Vector2 q = a - x;
        double A = u.squaredNorm();
        double B = 2.0 * q.dot(u);
        double C = q.squaredNorm() - R * R;
        double disc = B * B - 4.0 * A * C;
        if (!(disc > 0.0) || A <= 0.0) continue;
        double sq = std::sqrt(disc);
        double t0 = std::max(0.0, (-B - sq) / (2.0 * A));
        double t1 = std::min(1.0, (-B + sq) / (2.0 * A));
        if (t1 <= t0) continue;
        double len = (t1 - t0) * s.length;
        clip.pieces.push_back({id, t0, t1, len});
        clip.total += len;
    }
}

// single-sample contribution of the Neumann data over the clipped boundary
double neumannTerm(const WalkContext& ctx, const Vector2& x, double R, NeumannClip& clip,
                   Rng& rng) {
    clipNeumann(ctx, x, R, clip);
    if (clip.total <= 0.0) return 0.0;
    double target = rng.uniform() * clip.total, run = 0.0;
    const NeumannClip::Piece* chosen = &clip.pieces.back();
    double local = 0.5;
    for (const auto& piece : clip.pieces) {
        if (target <= run + piece.length || &piece == &clip.pieces.back()) {
            chosen = &piece;
            local = std::clamp((target - run) / piece.length, 0.0, 1.0);
            break;
        }
        run += piece.length;
    }
    double t = chosen->t0 + (chosen->t1 - chosen->t0) * local;
    Vector2 y = ctx.scene.segmentPoint(chosen->segment, t);
    double r = std::clamp((y - x).norm(), 1e-12 * ctx.kernel.scale, R);
    double hval = ctx.problem.h(y, chosen->segment);
    return -ballGreens(ctx.kernel, R, r) * hval * clip.total;
}

// single-sample source contribution over the ball B(x, R)
double sourceTerm(const WalkContext& ctx, const Vector2& x, double R, Rng& rng) {
    BallPointSample ys = sampleBallGreens(ctx.poissonKernel, x, R, rng);
    double fy = ctx.problem.f(ys.p);
    if (fy == 0.0) return 0.0;
    if (ctx.hasNeumann && !ctx.scene.inside(ys.p)) return 0.0; // ball pokes past the boundary
    double contrib = fy * ballGreensMass(ctx.poissonKernel, R);
    if (ctx.screened) {
        double r = std::clamp((ys.p - x).norm(), 1e-13 * ctx.kernel.scale, R);
        contrib *= ballGreens(ctx.kernel, R, r) / ballGreens(ctx.poissonKernel, R, r);
    }
    return contrib;
}

// one recursive walk; accumulates source and Neumann terms per step and
// terminates with the Dirichlet value inside the epsilon shell
double walkSampleImpl(const WalkContext& ctx, Vector2 x, Rng& rng, bool& truncated) {
    double acc = 0.0, weight = 1.0;
    bool onNeumann = false;
    Vector2 inward = Vector2::Zero();
    NeumannClip clip;
    for (int step = 0; step < ctx.maxSteps; ++step) {
        ClosestPointResult cpD = ctx.scene.closestPoint(x, QueryFilter::DirichletOnly);
        if (!cpD.valid)
            throw SolverError("walk cannot terminate: scene has no Dirichlet boundary");
        if (cpD.dist <= ctx.eps) return acc + weight * dirichletValue(ctx, cpD);

        double R = cpD.dist;
        if (ctx.hasNeumann) R = std::min(R, ctx.scene.silhouetteDistance(x));
        R = std::max(R, ctx.rMin);
        double factor = onNeumann ? 2.0 : 1.0; // half-ball identity on the boundary

        if (ctx.problem.hasSource()) acc += weight * factor * sourceTerm(ctx, x, R, rng);
        if (ctx.hasNeumann && ctx.problem.h)
            acc += weight * factor * neumannTerm(ctx, x, R, clip, rng);

        Vector2 d = sampleDirection(rng, onNeumann ? &inward : nullptr);
        std::optional<RayHitResult> hit;
        if (ctx.hasNeumann)
            hit = ctx.scene.intersectRay(x, d, R, QueryFilter::NeumannOnly, ctx.tGuard);
        double travel = R;
        if (hit) {
            x = hit->point;
            travel = hit->t;
            const Vector2& n = ctx.scene.segments[hit->segment].normal;
            inward = n.dot(d) > 0.0 ? Vector2(-n) : n;
            onNeumann = true;
        } else {
            x += R * d;
            onNeumann = false;
        }
        if (ctx.screened) weight *= ballSphereWeight(ctx.kernel, R, travel);
    }
    truncated = true;
    ClosestPointResult cp = ctx.scene.closestPoint(x, QueryFilter::DirichletOnly);
    return acc + weight * dirichletValue(ctx, cp);
}

ScalarEstimate runWalks(const WalkContext& ctx, const Vector2& x, const WalkConfig& cfg) {
    int n = std::max(1, cfg.nWalks);
    double sum = 0.0, sumSq = 0.0;
    long truncated = 0;
    for (int k = 0; k < n; ++k) {
        Rng rng(cfg.seed, mixKey(cfg.stream, static_cast<uint64_t>(k)));
        bool trunc = false;
        double v = walkSampleImpl(ctx, x, rng, trunc);
        sum += v;
        sumSq += v * v;
        if (trunc) ++truncated;
    }
    ScalarEstimate est;
    est.count = n;
    est.truncated = truncated;
    est.mean = sum / n;
    double var = std::max(0.0, sumSq / n - est.mean * est.mean);
    est.se = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return est;
}

void requireInterior(const Scene& scene, const Vector2& x) {
    if (scene.closed() && !scene.inside(x))
        throw SolverError("evaluation point lies outside the domain");
}

// one gradient sample: sphere term on the first ball plus source and, for
// screened kernels, the sigma u volume term treated as extra source
Vector2 gradientSample(const WalkContext& ctx, const Vector2& x, double R, Rng& rng,
                       bool& truncated) {
    double theta = rng.uniform(0.0, 2.0 * Pi);
    Vector2 dir(std::cos(theta), std::sin(theta));
    Vector2 z = x + R * dir;
    double uz = walkSampleImpl(ctx, z, rng, truncated);
    Vector2 v = (2.0 / R) * uz * dir;
    if (ctx.problem.hasSource()) {
        BallPointSample ys = sampleBallGreens(ctx.poissonKernel, x, R, rng);
        double fy = ctx.problem.f(ys.p);
        if (fy != 0.0)
            v += ballGreensGradient(ctx.poissonKernel, x, R, ys.p) * (fy / ys.pdf);
    }
    if (ctx.screened && ctx.kernel.sigma > 0.0) {
        BallPointSample ys = sampleBallGreens(ctx.poissonKernel, x, R, rng);
        double uy = walkSampleImpl(ctx, ys.p, rng, truncated);
        v += ballGreensGradient(ctx.poissonKernel, x, R, ys.p) *
             (ctx.kernel.sigma * uy / ys.pdf);
    }
    return v;
}

double gradientBallRadius(const WalkContext& ctx, const Vector2& x) {
    ClosestPointResult cp = ctx.scene.closestPoint(x, QueryFilter::Any);
    if (!cp.valid) throw SolverError("gradient estimate: scene has no boundary");
    return std::max(cp.dist, ctx.rMin);
}

} // namespace

ScalarEstimate wosSolve(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                        const WalkConfig& cfg) {
    if (scene.hasNeumann()) throw SolverError("wosSolve requires an all-Dirichlet scene");
    WalkContext ctx = makeContext(scene, problem, cfg);
    requireInterior(scene, x);
    return runWalks(ctx, x, cfg);
}

ScalarEstimate wostSolve(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                         const WalkConfig& cfg) {
    WalkContext ctx = makeContext(scene, problem, cfg);
    requireInterior(scene, x);
    return runWalks(ctx, x, cfg);
}

VectorEstimate wostGradient(const Scene& scene, const PdeProblem& problem, const Vector2& x,
                            const WalkConfig& cfg) {
    WalkContext ctx = makeContext(scene, problem, cfg);
    requireInterior(scene, x);
    double R = gradientBallRadius(ctx, x);
    int n = std::max(1, cfg.nWalks);
    Vector2 sum = Vector2::Zero(), sumSq = Vector2::Zero();
    long truncated = 0;
    for (int k = 0; k < n; ++k) {
        Rng rng(cfg.seed, mixKey(cfg.stream, static_cast<uint64_t>(k)));
        bool trunc = false;
        Vector2 v = gradientSample(ctx, x, R, rng, trunc);
        sum += v;
        sumSq += v.cwiseProduct(v);
        if (trunc) ++truncated;
    }
    VectorEstimate est;
    est.count = n;
    est.truncated = truncated;
    est.mean = sum / n;
    Vector2 var = (sumSq / n - est.mean.cwiseProduct(est.mean)).cwiseMax(0.0);
    est.se = n > 1 ? Vector2((var / (n - 1)).cwiseSqrt()) : Vector2::Zero();
    return est;
}

ScalarEstimate wostNormalDerivative(const Scene& scene, const PdeProblem& problem,
                                    const Vector2& x, const Vector2& n, const WalkConfig& cfg) {
    WalkContext ctx = makeContext(scene, problem, cfg);
    requireInterior(scene, x);
    double R = gradientBallRadius(ctx, x);
    int count = std::max(1, cfg.nWalks);
    double sum = 0.0, sumSq = 0.0;
    long truncated = 0;
    for (int k = 0; k < count; ++k) {
        Rng rng(cfg.seed, mixKey(cfg.stream, static_cast<uint64_t>(k)));
        bool trunc = false;
        double v = n.dot(gradientSample(ctx, x, R, rng, trunc));
        sum += v;
        sumSq += v * v;
        if (trunc) ++truncated;
    }
    ScalarEstimate est;
    est.count = count;
    est.truncated = truncated;
    est.mean = sum / count;
    double var = std::max(0.0, sumSq / count - est.mean * est.mean);
    est.se = count > 1 ? std::sqrt(var / (count - 1)) : 0.0;
    return est;
}

namespace detail {

double walkSample(const Scene& scene, const PdeProblem& problem, Vector2 x, double eps,
                  double rMin, int maxSteps, Rng& rng, bool& truncated) {
    WalkConfig cfg;
    cfg.epsilon = eps;
    cfg.rMin = rMin;
    cfg.maxSteps = maxSteps;
    WalkContext ctx = makeContext(scene, problem, cfg);
    return walkSampleImpl(ctx, x, rng, truncated);
}

} // namespace detail

} // namespace bvc
