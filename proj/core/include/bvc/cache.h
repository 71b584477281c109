#pragma once

#include <functional>

#include "bvc/pointwise.h"
#include "bvc/sampling.h"

namespace bvc {

// provenance of a solve-region boundary segment
enum class RegionSegmentKind {
    KnownNeumann,    // lies on the scene's Neumann boundary: d = h known exactly
    EstimatedOffset, // inward-offset Dirichlet boundary: u and d estimated
    UserLoop,        // subdomain loop supplied by the caller: u and d estimated
};

// boundary of the region the cache integrates over, plus bookkeeping
struct SolveRegion {
    Scene boundary; // closed loops, outward normals
    std::vector<RegionSegmentKind> kinds;  // per boundary segment
    std::vector<int> sourceSegment;        // originating scene segment, -1 if none
    double offset = 0.0;                   // l used for the offset construction
    double area = 0.0;                     // region area (holes subtracted)
    bool wholeDomain = true;

    // whole-domain evaluation points within l of the Dirichlet boundary use
    // pointwise walks instead of splats
    bool fallbackBand(const Scene& scene, const Vector2& x) const;
};

struct RegionRequest {
    enum class Mode { WholeDomain, Subdomain };
    Mode mode = Mode::WholeDomain;
    double offset = 0.0;            // l; 0 => 5 x epsilon
    const Scene* subdomain = nullptr; // closed user loop for Subdomain mode
};

// whole-domain mode keeps the Neumann boundary and offsets the Dirichlet
// boundary inward by l (miter joins, reflex corners capped by 8-segment arcs);
// subdomain mode passes the user loop through
SolveRegion buildSolveRegion(const Scene& scene, const RegionRequest& request, double epsilon);

struct CachedBoundarySample {
    Vector2 z = Vector2::Zero();
    Vector2 n = Vector2::Zero(); // unit outward normal of the region
    double pdf = 0.0;            // 1 / |region boundary|
    double uHat = 0.0;           // estimate of u(z)
    double dHat = 0.0;           // estimate of du/dn(z)
    double weight = 0.0;         // Voronoi cell length when enabled, else 0
    int segment = -1;            // region boundary segment id
    double arc = 0.0;            // arc-length coordinate within the segment's loop
};

struct BoundaryCache {
    std::vector<CachedBoundarySample> samples;
    double boundaryLength = 0.0;
    long resampled = 0; // failed samples dropped and redrawn
    bool voronoi = false;
};

struct CachedSourceSample {
    Vector2 y = Vector2::Zero();
    double pdf = 0.0; // 1 / area
    double f = 0.0;
};

struct SourceCache {
    std::vector<CachedSourceSample> samples;
    double area = 0.0;
};

// per-point running sums; GetSolution stays a running mean across rounds
struct EvaluationPoint {
    Vector2 x = Vector2::Zero();
    bool fallback = false;           // pointwise walks instead of splats
    bool gradientUnreliable = false; // within l of the region boundary
    double ballRadius = 0.0;         // max distance to the region boundary (ball-kernel mode)

    double boundarySum = 0.0, sourceSum = 0.0;
    long nBoundary = 0, mSource = 0; // accepted splat counts
    Vector2 boundaryGradSum = Vector2::Zero(), sourceGradSum = Vector2::Zero();
    long nBoundaryGrad = 0, mSourceGrad = 0;

    double walkSum = 0.0; // fallback accumulation
    long walkCount = 0, walkTruncated = 0;
    Vector2 gradientWalkSum = Vector2::Zero();
    long gradientWalkCount = 0;

    long skipped = 0; // near-coincident samples dropped for this point

    double solution() const {
        if (fallback) return walkCount > 0 ? walkSum / walkCount : 0.0;
        double v = nBoundary > 0 ? boundarySum / nBoundary : 0.0;
        if (mSource > 0) v += sourceSum / mSource;
        return v;
    }
    Vector2 gradient() const {
        if (fallback)
            return gradientWalkCount > 0 ? Vector2(gradientWalkSum / gradientWalkCount)
                                         : Vector2::Zero();
        Vector2 v = nBoundaryGrad > 0 ? Vector2(boundaryGradSum / nBoundaryGrad)
                                      : Vector2::Zero();
        if (mSourceGrad > 0) v += sourceGradSum / mSourceGrad;
        return v;
    }
    bool solutionDefined(bool hasSource) const {
        if (fallback) return walkCount > 0;
        return nBoundary >= 1 && (!hasSource || mSource >= 1);
    }
};

enum class ClampMode { Off, ClampOnly, ClampCorrect };

struct CacheConfig {
    int nBoundary = 1024;      // boundary cache size N
    int nSource = 1024;        // source cache size M
    int nWalksNeumann = 16;    // walk budget for u estimates
    int nWalksDirichlet = 160; // walk budget for du/dn estimates (10x)
    double offset = 0.0;       // l; 0 => 5 x epsilon
    double clamp = 0.0;        // c; 0 => 10 / diagonal when clamping enabled
    ClampMode clampMode = ClampMode::Off;
    bool sourceBall = false;   // ball-kernel source mode (Poisson only)
    int correctionWalks = 4;   // walk budget per saturated correction hit
    bool voronoi = false;      // Voronoi sample weights instead of 1/(N pdf)
    bool stratified = true;
    WalkConfig walk;           // epsilon / rMin / maxSteps / nWalks for pointwise calls
    int threads = 0;           // 0 => BVC_THREADS env or hardware

    double resolvedClamp(const Scene& scene) const {
        return clamp > 0.0 ? clamp : 10.0 / scene.diagonal;
    }
};

struct RoundStats {
    long resampled = 0;
    long cacheWalks = 0;
    long cacheTruncated = 0;
    double generateSeconds = 0.0;
    double splatSeconds = 0.0;
};

// kernel and bookkeeping knobs shared by the splat operations
struct SplatConfig {
    KernelSpec kernel = KernelSpec::poisson(2); // scale = scene diagonal
    double coincidenceTol = 0.0;                // 1e-12 x diagonal
    bool voronoi = false;
    bool useBallGreens = false; // G -> G^B(x, ballRadius) in the d-hat term
    int threads = 1;
};

SplatConfig makeSplatConfig(const Scene& scene, const PdeProblem& problem, const CacheConfig& cfg);

// sets fallback / gradientUnreliable flags and per-point ball radii
void markEvaluationPoints(const Scene& scene, const SolveRegion& region, const CacheConfig& cfg,
                          std::vector<EvaluationPoint>& pts);

// N uniform boundary samples with estimated (u, du/dn); deterministic for a
// fixed (seed, round) under any thread count
BoundaryCache generateBoundaryCache(const Scene& scene, const PdeProblem& problem,
                                    const SolveRegion& region, const CacheConfig& cfg,
                                    uint64_t seed, uint64_t round, RoundStats* stats = nullptr);

SourceCache generateSourceCache(const PdeProblem& problem, const SolveRegion& region,
                                const CacheConfig& cfg, uint64_t seed, uint64_t round);

// boundary-integral splats: sum += (dG/dn u - G d)/pdf per boundary sample and
// sum += G f / pdf per source sample; near-coincident samples are skipped
void splatSolution(const BoundaryCache& bcache, const SourceCache& scache,
                   std::vector<EvaluationPoint>& pts, const SplatConfig& cfg);

// gradient-kernel splats into the vector sums; same counts and skip policy
void splatGradient(const BoundaryCache& bcache, const SourceCache& scache,
                   std::vector<EvaluationPoint>& pts, const SplatConfig& cfg);

// fresh u(z) estimate at a region boundary point, used by the clamp correction
using BoundaryEvaluator = std::function<double(const Vector2& z, int segment, Rng& rng)>;

// boundary splat with dG/dn clamped to [-c, c]; ClampCorrect adds the
// ray-sampled correction term per evaluation point (the G d term is never
// clamped)
void correctedBoundarySplat(const BoundaryCache& bcache, std::vector<EvaluationPoint>& pts,
                            const SolveRegion& region, const SplatConfig& cfg, double clampBound,
                            ClampMode mode, const BoundaryEvaluator& eval, uint64_t seed,
                            uint64_t stream);

// source splat through the clamped ball kernel G^B plus its ball-sampled
// correction; Poisson only
void correctedSourceSplat(const SourceCache& scache, std::vector<EvaluationPoint>& pts,
                          const SolveRegion& region, const SplatConfig& cfg, double clampBound,
                          const std::function<double(const Vector2&)>& f, uint64_t seed,
                          uint64_t stream);

// one progressive round: build fresh caches, splat to non-fallback points,
// accumulate pointwise walks at fallback points, discard the caches
RoundStats updateSolution(const Scene& scene, const PdeProblem& problem, const SolveRegion& region,
                          const CacheConfig& cfg, std::vector<EvaluationPoint>& pts, uint64_t seed,
                          uint64_t round, bool gradients = false,
                          const BoundaryEvaluator& correctionEval = {});

} // namespace bvc
