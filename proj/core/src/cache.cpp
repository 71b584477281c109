#include "bvc/cache.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "bvc/parallel.h"

namespace bvc {

namespace {

// fixed salts keep the RNG streams of the different phases disjoint
constexpr uint64_t kBoundaryPosSalt = 0x1001;
constexpr uint64_t kBoundaryWalkSalt = 0x1002;
constexpr uint64_t kBoundaryRedrawSalt = 0x1003;
constexpr uint64_t kSourceSalt = 0x1004;
constexpr uint64_t kFallbackSalt = 0x1005;
constexpr uint64_t kFallbackGradSalt = 0x1006;
constexpr uint64_t kBoundaryCorrSalt = 0x1007;
constexpr uint64_t kSourceCorrSalt = 0x1008;

double seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::optional<Vector2> lineIntersect(const Vector2& p1, const Vector2& d1, const Vector2& p2,
                                     const Vector2& d2) {
    double denom = cross2(d1, d2);
    if (std::abs(denom) < 1e-12 * d1.norm() * d2.norm()) return std::nullopt;
    double t = cross2(p2 - p1, d2) / denom;
    return Vector2(p1 + t * d1);
}

// offset construction working unit: a polyline with shared provenance
struct Piece {
    std::vector<Vector2> pts;
    BoundaryLabel label = BoundaryLabel::Dirichlet;
    RegionSegmentKind kind = RegionSegmentKind::EstimatedOffset;
    int source = -1;
};

bool properIntersect(const Vector2& a1, const Vector2& b1, const Vector2& a2, const Vector2& b2) {
    double o1 = cross2(b1 - a1, a2 - a1);
    double o2 = cross2(b1 - a1, b2 - a1);
    double o3 = cross2(b2 - a2, a1 - a2);
    double o4 = cross2(b2 - a2, b1 - a2);
    return o1 * o2 < 0.0 && o3 * o4 < 0.0;
}

SolveRegion assembleRegion(std::vector<std::vector<Piece>> loops, double l, bool wholeDomain,
                           double weldTol) {
    std::vector<Vector2> verts;
    std::vector<SegmentSpec> specs;
    std::vector<RegionSegmentKind> kinds;
    std::vector<int> sources;
    struct Emit {
        Vector2 a, b;
    };
    std::vector<Emit> emitted; // for the self-intersection scan

    for (auto& pieces : loops) {
        int base = static_cast<int>(verts.size());
        Vector2 prev = Vector2::Zero();
        bool first = true;
        std::vector<int> pieceOf; // owning piece per emitted segment of this loop
        std::vector<std::pair<Vector2, Vector2>> loopSegs;
        for (size_t pi = 0; pi < pieces.size(); ++pi) {
            for (const Vector2& p : pieces[pi].pts) {
                if (first) {
                    prev = p;
                    first = false;
                    continue;
                }
                if ((p - prev).norm() < weldTol) continue;
                loopSegs.push_back({prev, p});
                pieceOf.push_back(static_cast<int>(pi));
                prev = p;
            }
        }
        if (loopSegs.size() < 3) throw ParseError("region offset collapsed a boundary loop");
        // drop the closing duplicate if the chain already returned to its start
        if ((loopSegs.back().second - loopSegs.front().first).norm() >= weldTol) {
            loopSegs.push_back({loopSegs.back().second, loopSegs.front().first});
            pieceOf.push_back(pieceOf.back());
        }
        int count = static_cast<int>(loopSegs.size());
        for (int k = 0; k < count; ++k) {
            verts.push_back(loopSegs[k].first);
            const Piece& owner = pieces[pieceOf[k]];
            specs.push_back({base + k, base + (k + 1) % count, owner.label});
            kinds.push_back(owner.kind);
            sources.push_back(owner.source);
            emitted.push_back({loopSegs[k].first, loopSegs[k].second});
        }
    }

    // self-intersection scan (non-adjacent pairs only)
    std::vector<std::pair<int, int>> crossings;
    for (size_t i = 0; i < emitted.size(); ++i) {
        for (size_t j = i + 1; j < emitted.size(); ++j) {
            bool shared = (emitted[i].a - emitted[j].a).norm() < weldTol ||
                          (emitted[i].a - emitted[j].b).norm() < weldTol ||
                          (emitted[i].b - emitted[j].a).norm() < weldTol ||
                          (emitted[i].b - emitted[j].b).norm() < weldTol;
            if (shared) continue;
            if (properIntersect(emitted[i].a, emitted[i].b, emitted[j].a, emitted[j].b))
                crossings.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    if (!crossings.empty()) {
        std::string msg = "region offset self-intersects: segments";
        for (auto [i, j] : crossings) msg += " " + std::to_string(i) + "-" + std::to_string(j);
        throw ParseError(msg);
    }

    SolveRegion region;
    region.boundary = Scene::build(std::move(verts), specs);
    region.kinds = std::move(kinds);
    region.sourceSegment = std::move(sources);
    region.offset = l;
    region.wholeDomain = wholeDomain;
    region.area = loopArea(region.boundary);
    if (!(region.area > 0.0)) throw ParseError("region offset produced a non-positive area");
    return region;
}

} // namespace

bool SolveRegion::fallbackBand(const Scene& scene, const Vector2& x) const {
    if (!wholeDomain) return false;
    ClosestPointResult cp = scene.closestPoint(x, QueryFilter::DirichletOnly);
    return cp.valid && cp.dist < offset;
}

SolveRegion buildSolveRegion(const Scene& scene, const RegionRequest& request, double epsilon) {
    double l = request.offset > 0.0 ? request.offset : 5.0 * epsilon;
    if (!(l > epsilon)) throw std::invalid_argument("region offset l must exceed epsilon");
    double weldTol = 1e-10 * std::max(scene.diagonal, 1e-30);

    if (request.mode == RegionRequest::Mode::Subdomain) {
        if (!request.subdomain) throw std::invalid_argument("subdomain mode needs a region loop");
        if (!request.subdomain->closed())
            throw ParseError("subdomain region loops must be closed");
        SolveRegion region;
        region.boundary = *request.subdomain;
        region.kinds.assign(region.boundary.segments.size(), RegionSegmentKind::UserLoop);
        region.sourceSegment.assign(region.boundary.segments.size(), -1);
        region.offset = l;
        region.wholeDomain = false;
        region.area = loopArea(region.boundary);
        if (!(region.area > 0.0))
            throw ParseError("subdomain region must wind counterclockwise with positive area");
        return region;
    }

    if (!scene.closed()) throw ParseError("whole-domain regions need a closed scene");

    std::vector<std::vector<Piece>> loopPieces;
    for (const auto& loop : scene.loops) {
        std::vector<Piece> pieces;
        for (int sid : loop) {
            const Segment& s = scene.segments[sid];
            Vector2 a = scene.vertices[s.a], b = scene.vertices[s.b];
            if (s.label == BoundaryLabel::Neumann)
                pieces.push_back({{a, b}, s.label, RegionSegmentKind::KnownNeumann, sid});
            else {
                Vector2 o = -l * s.normal;
                pieces.push_back(
                    {{Vector2(a + o), Vector2(b + o)}, s.label, RegionSegmentKind::EstimatedOffset, sid});
            }
        }
        int n = static_cast<int>(pieces.size());
        std::vector<std::vector<Piece>> arcAfter(n);
        for (int i = 0; i < n; ++i) {
            int j = (i + 1) % n;
            Piece& P = pieces[i];
            Piece& Q = pieces[j];
            const Segment& sp = scene.segments[P.source];
            const Segment& sq = scene.segments[Q.source];
            bool pOff = P.kind == RegionSegmentKind::EstimatedOffset;
            bool qOff = Q.kind == RegionSegmentKind::EstimatedOffset;
            if (!pOff && !qOff) continue; // Neumann pair already shares the vertex
            Vector2 up = (scene.vertices[sp.b] - scene.vertices[sp.a]).normalized();
            Vector2 uq = (scene.vertices[sq.b] - scene.vertices[sq.a]).normalized();
            if (pOff && qOff) {
                if ((sp.normal - sq.normal).norm() < 1e-9) { // collinear: translated ends agree
                    Vector2 mid = 0.5 * (P.pts.back() + Q.pts.front());
                    P.pts.back() = mid;
                    Q.pts.front() = mid;
                    continue;
                }
                double turn = cross2(up, uq);
                if (turn > 1e-12) { // convex corner: miter join
                    auto q = lineIntersect(P.pts.back(), up, Q.pts.front(), uq);
                    if (!q) throw ParseError("region offset: degenerate miter join");
                    P.pts.back() = *q;
                    Q.pts.front() = *q;
                } else if (turn < -1e-12) { // reflex corner: arc cap around the vertex
                    Vector2 v = scene.vertices[sq.a];
                    double phi = std::atan2(sp.normal.y(), sp.normal.x());
                    double delta =
                        std::atan2(cross2(sp.normal, sq.normal), sp.normal.dot(sq.normal));
                    Piece arc;
                    arc.label = P.label;
                    arc.kind = RegionSegmentKind::EstimatedOffset;
                    arc.source = P.source;
                    for (int k = 0; k <= 8; ++k) {
                        double a = phi + delta * k / 8.0;
                        arc.pts.push_back(v - l * Vector2(std::cos(a), std::sin(a)));
                    }
                    arcAfter[i].push_back(std::move(arc));
                } else { // straight-through spike: weld
                    Vector2 mid = 0.5 * (P.pts.back() + Q.pts.front());
                    P.pts.back() = mid;
                    Q.pts.front() = mid;
                }
            } else { // Dirichlet/Neumann junction: trim both lines to their crossing
                Vector2 anchorP = P.pts.back(), anchorQ = Q.pts.front();
                auto q = lineIntersect(anchorP, up, anchorQ, uq);
                if (!q)
                    throw ParseError(
                        "region offset: junction between parallel boundary segments");
                P.pts.back() = *q;
                Q.pts.front() = *q;
            }
        }
        // trimming must not invert any straight piece
        for (int i = 0; i < n; ++i) {
            const Piece& P = pieces[i];
            const Segment& sp = scene.segments[P.source];
            Vector2 u = scene.vertices[sp.b] - scene.vertices[sp.a];
            if ((P.pts.back() - P.pts.front()).dot(u) <= 0.0)
                throw ParseError("region offset too large: segment " + std::to_string(P.source) +
                                 " inverted");
        }
        std::vector<Piece> flat;
        for (int i = 0; i < n; ++i) {
            flat.push_back(std::move(pieces[i]));
            for (auto& a : arcAfter[i]) flat.push_back(std::move(a));
        }
        loopPieces.push_back(std::move(flat));
    }
    return assembleRegion(std::move(loopPieces), l, true, weldTol);
}

SplatConfig makeSplatConfig(const Scene& scene, const PdeProblem& problem,
                            const CacheConfig& cfg) {
    problem.kernel.validate();
    SplatConfig s;
    s.kernel = problem.kernel;
    s.kernel.scale = scene.diagonal;
    s.coincidenceTol = 1e-12 * scene.diagonal;
    s.voronoi = cfg.voronoi;
    s.useBallGreens = cfg.sourceBall;
    if (s.useBallGreens && s.kernel.kind != KernelKind::Poisson)
        throw SolverError("ball-kernel source mode requires the Poisson kernel");
    s.threads = resolveThreadCount(cfg.threads);
    return s;
}

void markEvaluationPoints(const Scene& scene, const SolveRegion& region, const CacheConfig& cfg,
                          std::vector<EvaluationPoint>& pts) {
    for (auto& pt : pts) {
        pt.fallback = region.fallbackBand(scene, pt.x);
        ClosestPointResult cp = region.boundary.closestPoint(pt.x);
        pt.gradientUnreliable = cp.valid && cp.dist < region.offset;
        if (cfg.sourceBall) {
            double r = 0.0;
            for (const Vector2& v : region.boundary.vertices)
                r = std::max(r, (v - pt.x).norm());
            pt.ballRadius = r;
        }
    }
}

namespace {

void assignVoronoiWeights(const SolveRegion& region, BoundaryCache& cache) {
    const Scene& b = region.boundary;
    std::vector<std::vector<std::pair<double, int>>> perLoop(b.loops.size());
    for (size_t i = 0; i < cache.samples.size(); ++i) {
        const auto& s = cache.samples[i];
        perLoop[b.segments[s.segment].loop].push_back({s.arc, static_cast<int>(i)});
    }
    for (size_t li = 0; li < perLoop.size(); ++li) {
        auto& entries = perLoop[li];
        if (entries.empty()) continue;
        std::sort(entries.begin(), entries.end());
        std::vector<double> arcs;
        arcs.reserve(entries.size());
        for (auto& e : entries) arcs.push_back(e.first);
        std::vector<double> w = voronoiWeights(arcs, b.loopLengths[li]);
        for (size_t k = 0; k < entries.size(); ++k) cache.samples[entries[k].second].weight = w[k];
    }
}

} // namespace

BoundaryCache generateBoundaryCache(const Scene& scene, const PdeProblem& problem,
                                    const SolveRegion& region, const CacheConfig& cfg,
                                    uint64_t seed, uint64_t round, RoundStats* stats) {
    BoundaryCache cache;
    cache.voronoi = cfg.voronoi;
    BoundarySampler sampler(region.boundary, QueryFilter::Any);
    cache.boundaryLength = sampler.totalLength();
    int N = std::max(1, cfg.nBoundary);
    Rng posRng(seed, mixKey(kBoundaryPosSalt, round));
    std::vector<BoundaryPointSample> pos;
    sampler.sample(N, cfg.stratified, posRng, pos);

    double eps = cfg.walk.resolvedEpsilon(scene);
    cache.samples.resize(N);
    std::vector<char> failed(static_cast<size_t>(N), 0);
    std::vector<long> trunc(static_cast<size_t>(N), 0), walks(static_cast<size_t>(N), 0);

    auto estimateAt = [&](const BoundaryPointSample& bp, uint64_t streamTag,
                          CachedBoundarySample& out, long& truncAcc, long& walkAcc) -> bool {
        out.z = bp.p;
        out.n = bp.n;
        out.pdf = bp.pdf;
        out.segment = bp.segment;
        out.arc = bp.arc;
        out.weight = 0.0;
        WalkConfig wc = cfg.walk;
        wc.seed = seed;
        try {
            if (region.kinds[bp.segment] == RegionSegmentKind::KnownNeumann) {
                int src = region.sourceSegment[bp.segment];
                out.dHat = problem.h ? problem.h(bp.p, src) : 0.0;
                wc.nWalks = cfg.nWalksNeumann;
                wc.stream = mixKey(streamTag, 1);
                // the sample sits on the true boundary; walk from slightly inside
                ScalarEstimate ue =
                    wostSolve(scene, problem, Vector2(bp.p - 0.5 * eps * bp.n), wc);
                out.uHat = ue.mean;
                truncAcc += ue.truncated;
                walkAcc += ue.count;
            } else {
                wc.nWalks = cfg.nWalksNeumann;
                wc.stream = mixKey(streamTag, 1);
                ScalarEstimate ue = wostSolve(scene, problem, bp.p, wc);
                out.uHat = ue.mean;
                truncAcc += ue.truncated;
                walkAcc += ue.count;
                wc.nWalks = cfg.nWalksDirichlet;
                wc.stream = mixKey(streamTag, 2);
                ScalarEstimate de = wostNormalDerivative(scene, problem, bp.p, bp.n, wc);
                out.dHat = de.mean;
                truncAcc += de.truncated;
                walkAcc += de.count;
            }
        } catch (const std::exception&) {
            return false;
        }
        return std::isfinite(out.uHat) && std::isfinite(out.dHat);
    };

    parallelFor(static_cast<size_t>(N), cfg.threads, [&](size_t i) {
        uint64_t tag = mixKey(mixKey(kBoundaryWalkSalt, round), i);
        failed[i] = estimateAt(pos[i], tag, cache.samples[i], trunc[i], walks[i]) ? 0 : 1;
    });

    // deterministic serial redraw of failed samples
    Rng redraw(seed, mixKey(kBoundaryRedrawSalt, round));
    for (int i = 0; i < N; ++i) {
        int guard = 0;
        while (failed[i]) {
            if (++guard > 64)
                throw SolverError("boundary cache: sample kept failing after 64 redraws");
            ++cache.resampled;
            std::vector<BoundaryPointSample> one;
            sampler.sample(1, false, redraw, one);
            uint64_t tag = mixKey(mixKey(kBoundaryRedrawSalt, round),
                                  static_cast<uint64_t>(i) * 131 + guard);
            failed[i] = estimateAt(one[0], tag, cache.samples[i], trunc[i], walks[i]) ? 0 : 1;
        }
    }

    if (stats) {
        for (int i = 0; i < N; ++i) {
            stats->cacheTruncated += trunc[i];
            stats->cacheWalks += walks[i];
        }
        stats->resampled += cache.resampled;
    }
    if (cfg.voronoi) assignVoronoiWeights(region, cache);
    return cache;
}

SourceCache generateSourceCache(const PdeProblem& problem, const SolveRegion& region,
                                const CacheConfig& cfg, uint64_t seed, uint64_t round) {
    SourceCache cache;
    RegionSampler sampler(region.boundary);
    cache.area = sampler.area();
    if (!problem.hasSource()) return cache;
    int M = std::max(1, cfg.nSource);
    Rng rng(seed, mixKey(kSourceSalt, round));
    std::vector<RegionPointSample> pos;
    sampler.sample(M, cfg.stratified, rng, pos);
    cache.samples.resize(M);
    for (int i = 0; i < M; ++i)
        cache.samples[i] = {pos[i].p, pos[i].pdf, problem.f(pos[i].p)};
    return cache;
}

namespace {

// G(x, y), or the ball kernel centered at the evaluation point in ball mode
double greensValue(const SplatConfig& cfg, const EvaluationPoint& pt, const Vector2& y) {
    if (!cfg.useBallGreens) return greensFree(cfg.kernel, pt.x, y);
    KernelSpec ball = KernelSpec::poisson(2, cfg.kernel.scale);
    double r = (y - pt.x).norm();
    return ballGreens(ball, pt.ballRadius, std::min(r, pt.ballRadius));
}

void requireBallRadius(const SplatConfig& cfg, const EvaluationPoint& pt) {
    if (cfg.useBallGreens && !(pt.ballRadius > 0.0))
        throw SolverError("ball-kernel mode: evaluation point has no ball radius "
                          "(markEvaluationPoints not applied)");
}

} // namespace

void splatSolution(const BoundaryCache& bcache, const SourceCache& scache,
                   std::vector<EvaluationPoint>& pts, const SplatConfig& cfg) {
    long nRound = static_cast<long>(bcache.samples.size());
    parallelFor(pts.size(), cfg.threads, [&](size_t pi) {
        EvaluationPoint& pt = pts[pi];
        if (pt.fallback) return;
        requireBallRadius(cfg, pt);
        double bsum = 0.0, ssum = 0.0;
        long bn = 0, mn = 0, skip = 0;
        for (const auto& s : bcache.samples) {
            double r = (pt.x - s.z).norm();
            if (r < cfg.coincidenceTol) {
                ++skip;
                continue;
            }
            double val = poissonKernelFree(cfg.kernel, pt.x, s.z, s.n) * s.uHat -
                         greensValue(cfg, pt, s.z) * s.dHat;
            bsum += cfg.voronoi ? val * s.weight * nRound : val / s.pdf;
            ++bn;
        }
        for (const auto& s : scache.samples) {
            double r = (pt.x - s.y).norm();
            if (r < cfg.coincidenceTol) {
                ++skip;
                continue;
            }
            ssum += greensValue(cfg, pt, s.y) * s.f / s.pdf;
            ++mn;
        }
        pt.boundarySum += bsum;
        pt.nBoundary += bn;
        pt.sourceSum += ssum;
        pt.mSource += mn;
        pt.skipped += skip;
    });
}

void splatGradient(const BoundaryCache& bcache, const SourceCache& scache,
                   std::vector<EvaluationPoint>& pts, const SplatConfig& cfg) {
    long nRound = static_cast<long>(bcache.samples.size());
    parallelFor(pts.size(), cfg.threads, [&](size_t pi) {
        EvaluationPoint& pt = pts[pi];
        if (pt.fallback) return;
        Vector2 bsum = Vector2::Zero(), ssum = Vector2::Zero();
        long bn = 0, mn = 0, skip = 0;
        for (const auto& s : bcache.samples) {
            double r = (pt.x - s.z).norm();
            if (r < cfg.coincidenceTol) {
                ++skip;
                continue;
            }
            Vector2 val = poissonKernelGradient(cfg.kernel, pt.x, s.z, s.n) * s.uHat -
                          greensFreeGradient(cfg.kernel, pt.x, s.z) * s.dHat;
            bsum += cfg.voronoi ? Vector2(val * s.weight * nRound) : Vector2(val / s.pdf);
            ++bn;
        }
        for (const auto& s : scache.samples) {
            double r = (pt.x - s.y).norm();
            if (r < cfg.coincidenceTol) {
                ++skip;
                continue;
            }
            ssum += greensFreeGradient(cfg.kernel, pt.x, s.y) * (s.f / s.pdf);
            ++mn;
        }
        pt.boundaryGradSum += bsum;
        pt.nBoundaryGrad += bn;
        pt.sourceGradSum += ssum;
        pt.mSourceGrad += mn;
        pt.skipped += skip;
    });
}

void correctedBoundarySplat(const BoundaryCache& bcache, std::vector<EvaluationPoint>& pts,
                            const SolveRegion& region, const SplatConfig& cfg, double clampBound,
                            ClampMode mode, const BoundaryEvaluator& eval, uint64_t seed,
                            uint64_t stream) {
    if (mode == ClampMode::Off)
        throw std::invalid_argument("corrected splat called with clamping off");
    if (!(clampBound > 0.0)) throw std::invalid_argument("clamp bound must be positive");
    if (mode == ClampMode::ClampCorrect && !eval)
        throw std::invalid_argument("clamp correction needs a boundary evaluator");
    long nRound = static_cast<long>(bcache.samples.size());
    parallelFor(pts.size(), cfg.threads, [&](size_t pi) {
        EvaluationPoint& pt = pts[pi];
        if (pt.fallback) return;
        requireBallRadius(cfg, pt);
        double bsum = 0.0;
        long bn = 0, skip = 0;
        for (const auto& s : bcache.samples) {
            double r = (pt.x - s.z).norm();
            if (r < cfg.coincidenceTol) {
                ++skip;
                continue;
            }
            double pk = clampKernel(poissonKernelFree(cfg.kernel, pt.x, s.z, s.n), clampBound);
            double val = pk * s.uHat - greensValue(cfg, pt, s.z) * s.dHat;
            bsum += cfg.voronoi ? val * s.weight * nRound : val / s.pdf;
            ++bn;
        }
        if (mode == ClampMode::ClampCorrect) {
            // one uniform ray per point and round; every boundary crossing whose
            // kernel saturates contributes its clipped remainder
            Rng rng(seed, mixKey(stream, static_cast<uint64_t>(pi)));
            double theta = rng.uniform(0.0, 2.0 * Pi);
            Vector2 d(std::cos(theta), std::sin(theta));
            std::vector<RayHitResult> hits = region.boundary.allRayHits(pt.x, d);
            if (hits.empty() && region.boundary.inside(pt.x))
                throw SolverError(
                    "clamp correction: no boundary ray hits from an interior point");
            double corr = 0.0;
            for (const auto& hit : hits) {
                const Vector2& n = region.boundary.segments[hit.segment].normal;
                Vector2 dz = hit.point - pt.x;
                double r2 = dz.squaredNorm();
                if (r2 < cfg.coincidenceTol * cfg.coincidenceTol) continue;
                double pk = poissonKernelFree(cfg.kernel, pt.x, hit.point, n);
                double a = std::abs(pk);
                if (a <= clampBound) continue; // unsaturated: nothing clipped, no walk
                double uz = eval(hit.point, hit.segment, rng);
                double sgn = n.dot(dz) > 0.0 ? 1.0 : -1.0;
                corr += sgn * (a - clampBound) * 2.0 * Pi * r2 / std::abs(n.dot(dz)) * uz;
            }
            bsum += corr * nRound; // spread over the running /N divisor
        }
        pt.boundarySum += bsum;
        pt.nBoundary += bn;
        pt.skipped += skip;
    });
}

void correctedSourceSplat(const SourceCache& scache, std::vector<EvaluationPoint>& pts,
                          const SolveRegion& region, const SplatConfig& cfg, double clampBound,
                          const std::function<double(const Vector2&)>& f, uint64_t seed,
                          uint64_t stream) {
    if (cfg.kernel.kind != KernelKind::Poisson || cfg.kernel.dim != 2)
        throw SolverError("ball-kernel source mode requires the 2D Poisson kernel");
    if (!(clampBound > 0.0)) throw std::invalid_argument("clamp bound must be positive");
    KernelSpec ball = KernelSpec::poisson(2, cfg.kernel.scale);
    long mRound = static_cast<long>(scache.samples.size());
    parallelFor(pts.size(), cfg.threads, [&](size_t pi) {
        EvaluationPoint& pt = pts[pi];
        if (pt.fallback) return;
        if (!(pt.ballRadius > 0.0))
            throw SolverError("ball-kernel mode: evaluation point has no ball radius "
                              "(markEvaluationPoints not applied)");
        double ssum = 0.0;
        long mn = 0, skip = 0;
        for (const auto& s : scache.samples) {
            double r = (pt.x - s.y).norm();
            if (r < cfg.coincidenceTol) {
                ++skip;
                continue;
            }
            double gb = ballGreens(ball, pt.ballRadius, std::min(r, pt.ballRadius));
            ssum += clampKernel(gb, clampBound) * s.f / s.pdf;
            ++mn;
        }
        if (std::isfinite(clampBound) && f) {
            Rng rng(seed, mixKey(stream, static_cast<uint64_t>(pi)));
            BallPointSample ys = sampleBallGreens(ball, pt.x, pt.ballRadius, rng);
            double r = std::min((ys.p - pt.x).norm(), pt.ballRadius);
            double gb = ballGreens(ball, pt.ballRadius, std::max(r, 1e-14 * pt.ballRadius));
            double m = std::max(0.0, 1.0 - clampBound / std::abs(gb));
            if (m > 0.0 && region.boundary.inside(ys.p))
                ssum += ballGreensMass(ball, pt.ballRadius) * m * f(ys.p) * mRound;
        }
        pt.sourceSum += ssum;
        pt.mSource += mn;
        pt.skipped += skip;
    });
}

namespace {

BoundaryEvaluator makeDefaultEvaluator(const Scene& scene, const PdeProblem& problem,
                                       const SolveRegion& region, const CacheConfig& cfg) {
    double eps = cfg.walk.resolvedEpsilon(scene);
    double rmin = cfg.walk.resolvedRMin(scene);
    int budget = std::max(1, cfg.correctionWalks);
    int maxSteps = cfg.walk.maxSteps;
    return [&scene, &problem, &region, eps, rmin, budget, maxSteps](
               const Vector2& z, int segment, Rng& rng) {
        Vector2 zz = z;
        if (region.kinds[segment] == RegionSegmentKind::KnownNeumann)
            zz -= 0.5 * eps * region.boundary.segments[segment].normal;
        double sum = 0.0;
        bool trunc = false;
        for (int k = 0; k < budget; ++k)
            sum += detail::walkSample(scene, problem, zz, eps, rmin, maxSteps, rng, trunc);
        return sum / budget;
    };
}

} // namespace

RoundStats updateSolution(const Scene& scene, const PdeProblem& problem, const SolveRegion& region,
                          const CacheConfig& cfg, std::vector<EvaluationPoint>& pts, uint64_t seed,
                          uint64_t round, bool gradients, const BoundaryEvaluator& correctionEval) {
    RoundStats stats;
    problem.kernel.validate();
    if (cfg.sourceBall && gradients)
        throw SolverError("ball-kernel source mode does not support gradient splats");
    SplatConfig scfg = makeSplatConfig(scene, problem, cfg); // validates the mode

    auto t0 = std::chrono::steady_clock::now();
    BoundaryCache bcache = generateBoundaryCache(scene, problem, region, cfg, seed, round, &stats);
    SourceCache scache = generateSourceCache(problem, region, cfg, seed, round);
    auto t1 = std::chrono::steady_clock::now();
    stats.generateSeconds = seconds(t0, t1);

    SourceCache emptySource;
    BoundaryCache emptyBoundary;
    if (cfg.clampMode == ClampMode::Off) {
        if (cfg.sourceBall) {
            splatSolution(bcache, emptySource, pts, scfg);
            if (problem.hasSource())
                correctedSourceSplat(scache, pts, region, scfg, Inf, problem.f, seed,
                                     mixKey(kSourceCorrSalt, round));
        } else {
            splatSolution(bcache, scache, pts, scfg);
        }
    } else {
        double c = cfg.resolvedClamp(scene);
        BoundaryEvaluator eval = correctionEval;
        if (!eval && cfg.clampMode == ClampMode::ClampCorrect)
            eval = makeDefaultEvaluator(scene, problem, region, cfg);
        correctedBoundarySplat(bcache, pts, region, scfg, c, cfg.clampMode, eval, seed,
                               mixKey(kBoundaryCorrSalt, round));
        if (problem.hasSource()) {
            if (cfg.sourceBall)
                correctedSourceSplat(scache, pts, region, scfg, c, problem.f, seed,
                                     mixKey(kSourceCorrSalt, round));
            else
                splatSolution(emptyBoundary, scache, pts, scfg);
        }
    }
    if (gradients) splatGradient(bcache, scache, pts, scfg);

    parallelFor(pts.size(), cfg.threads, [&](size_t i) {
        EvaluationPoint& pt = pts[i];
        if (!pt.fallback) return;
        WalkConfig wc = cfg.walk;
        wc.seed = seed;
        wc.stream = mixKey(mixKey(kFallbackSalt, round), i);
        ScalarEstimate est = wostSolve(scene, problem, pt.x, wc);
        pt.walkSum += est.mean * est.count;
        pt.walkCount += est.count;
        pt.walkTruncated += est.truncated;
        if (gradients) {
            wc.stream = mixKey(mixKey(kFallbackGradSalt, round), i);
            VectorEstimate ge = wostGradient(scene, problem, pt.x, wc);
            pt.gradientWalkSum += ge.mean * ge.count;
            pt.gradientWalkCount += ge.count;
        }
    });
    stats.splatSeconds = seconds(t1, std::chrono::steady_clock::now());
    return stats;
}

} // namespace bvc
