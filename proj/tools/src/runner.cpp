#include "runner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "bvc/parallel.h"
#include "bvc/problems.h"
#include "image.h"

namespace bvc::cli {

namespace {

constexpr uint64_t kPointwiseSalt = 0x2001;
constexpr uint64_t kPointwiseGradSalt = 0x2002;

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool evaluable(const Scene& scene, const SolveRegion* region, const Vector2& p) {
    if (!scene.inside(p)) return false;
    if (region && !region->wholeDomain && !region->boundary.inside(p)) return false;
    return true;
}

long totalWalks(const std::vector<EvaluationPoint>& pts) {
    long n = 0;
    for (const auto& p : pts) n += p.walkCount;
    return n;
}

long totalTruncated(const std::vector<EvaluationPoint>& pts) {
    long n = 0;
    for (const auto& p : pts) n += p.walkTruncated;
    return n;
}

void writeReportCsv(const std::string& path, const std::vector<RoundReport>& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("report: cannot write \"" + path + "\"");
    out << "round,points,fallback_points,walks,truncated,cache_walks,cache_truncated,"
           "resampled,generate_seconds,splat_seconds,round_seconds\n";
    for (const auto& r : report)
        out << r.round << ',' << r.points << ',' << r.fallbackPoints << ',' << r.walks << ','
            << r.truncated << ',' << r.cacheWalks << ',' << r.cacheTruncated << ',' << r.resampled
            << ',' << fmt(r.generateSeconds) << ',' << fmt(r.splatSeconds) << ','
            << fmt(r.roundSeconds) << '\n';
    if (!out) throw std::runtime_error("report: write failed for \"" + path + "\"");
}

void writePointsCsv(const std::string& path, const SolveOutcome& outcome) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("output.grid: cannot write \"" + path + "\"");
    out << "x,y,value,valid\n";
    for (size_t i = 0; i < outcome.locations.size(); ++i) {
        int k = outcome.pointIndex[i];
        double v = k >= 0 ? outcome.pts[k].solution() : 0.0;
        out << fmt(outcome.locations[i].x()) << ',' << fmt(outcome.locations[i].y()) << ','
            << fmt(v) << ',' << (k >= 0 ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("output.grid: write failed for \"" + path + "\"");
}

GridField exactGrid(const GridSpec& spec, const std::function<double(const Vector2&)>& u) {
    GridField g = GridField::make(spec.origin, spec.spacing, spec.nx, spec.ny);
    for (int iy = 0; iy < spec.ny; ++iy)
        for (int ix = 0; ix < spec.nx; ++ix) g.at(ix, iy) = u(g.point(ix, iy));
    return g;
}

// least-squares slope of log10(y) against log10(x)
double logLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t n = x.size();
    for (size_t i = 0; i < n; ++i) {
        double lx = std::log10(x[i]), ly = std::log10(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double denom = n * sxx - sx * sx;
    return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

} // namespace

SolveOutcome runSolveInMemory(const RunConfig& cfg, const LoadedProblem& lp, bool gradients) {
    SolveOutcome outcome;
    outcome.hasSource = lp.problem.hasSource();

    CacheConfig cc = cfg.cache;
    cc.threads = cfg.threads;
    double eps = cc.walk.resolvedEpsilon(lp.scene);

    SolveRegion region;
    bool haveRegion = false;
    if (cfg.mode == SolveMode::Bvc) {
        RegionRequest req;
        req.offset = cc.offset;
        if (lp.subdomain) {
            req.mode = RegionRequest::Mode::Subdomain;
            req.subdomain = &*lp.subdomain;
        }
        region = buildSolveRegion(lp.scene, req, eps);
        haveRegion = true;
    }

    // collect evaluation points inside the domain (and region, when localized)
    const SolveRegion* regionPtr = haveRegion ? &region : nullptr;
    if (cfg.grid) {
        outcome.usedGrid = true;
        outcome.grid = GridField::make(cfg.grid->origin, cfg.grid->spacing, cfg.grid->nx,
                                       cfg.grid->ny);
        outcome.pointIndex.assign(size_t(cfg.grid->nx) * cfg.grid->ny, -1);
        for (int iy = 0; iy < cfg.grid->ny; ++iy)
            for (int ix = 0; ix < cfg.grid->nx; ++ix) {
                Vector2 p = outcome.grid.point(ix, iy);
                size_t idx = outcome.grid.index(ix, iy);
                outcome.grid.valid[idx] = 0;
                if (!evaluable(lp.scene, regionPtr, p)) continue;
                outcome.grid.valid[idx] = 1;
                outcome.pointIndex[idx] = int(outcome.pts.size());
                outcome.pts.push_back({});
                outcome.pts.back().x = p;
            }
    } else {
        outcome.locations = cfg.points;
        outcome.pointIndex.assign(cfg.points.size(), -1);
        for (size_t i = 0; i < cfg.points.size(); ++i) {
            if (!evaluable(lp.scene, regionPtr, cfg.points[i])) continue;
            outcome.pointIndex[i] = int(outcome.pts.size());
            outcome.pts.push_back({});
            outcome.pts.back().x = cfg.points[i];
        }
    }

    long fallbackCount = 0;
    if (cfg.mode == SolveMode::Bvc) {
        markEvaluationPoints(lp.scene, region, cc, outcome.pts);
        for (const auto& p : outcome.pts) fallbackCount += p.fallback ? 1 : 0;
    } else {
        for (auto& p : outcome.pts) p.fallback = true; // pointwise accumulation path
        fallbackCount = long(outcome.pts.size());
    }

    for (int r = 0; r < cfg.rounds; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        RoundReport rep;
        rep.round = r;
        rep.points = long(outcome.pts.size());
        rep.fallbackPoints = fallbackCount;
        long walk0 = totalWalks(outcome.pts), trunc0 = totalTruncated(outcome.pts);

        if (cfg.mode == SolveMode::Bvc) {
            RoundStats st =
                updateSolution(lp.scene, lp.problem, region, cc, outcome.pts, cfg.seed, r,
                               gradients);
            rep.cacheWalks = st.cacheWalks;
            rep.cacheTruncated = st.cacheTruncated;
            rep.resampled = st.resampled;
            rep.generateSeconds = st.generateSeconds;
            rep.splatSeconds = st.splatSeconds;
        } else {
            bool wos = cfg.mode == SolveMode::Wos;
            parallelFor(outcome.pts.size(), cfg.threads, [&](size_t i) {
                EvaluationPoint& pt = outcome.pts[i];
                WalkConfig wc = cc.walk;
                wc.seed = cfg.seed;
                wc.stream = mixKey(mixKey(kPointwiseSalt, uint64_t(r)), i);
                ScalarEstimate est = wos ? wosSolve(lp.scene, lp.problem, pt.x, wc)
                                         : wostSolve(lp.scene, lp.problem, pt.x, wc);
                pt.walkSum += est.mean * est.count;
                pt.walkCount += est.count;
                pt.walkTruncated += est.truncated;
                if (gradients) {
                    wc.stream = mixKey(mixKey(kPointwiseGradSalt, uint64_t(r)), i);
                    VectorEstimate ge = wostGradient(lp.scene, lp.problem, pt.x, wc);
                    pt.gradientWalkSum += ge.mean * ge.count;
                    pt.gradientWalkCount += ge.count;
                }
            });
        }
        rep.walks = totalWalks(outcome.pts) - walk0;
        rep.truncated = totalTruncated(outcome.pts) - trunc0;
        rep.roundSeconds = elapsed(t0);
        outcome.report.push_back(rep);
    }

    if (outcome.usedGrid) {
        for (size_t idx = 0; idx < outcome.pointIndex.size(); ++idx)
            if (outcome.pointIndex[idx] >= 0)
                outcome.grid.values[idx] = outcome.pts[outcome.pointIndex[idx]].solution();
    }
    return outcome;
}

int runSolve(const RunConfig& cfg) {
    LoadedProblem lp = materialize(cfg);
    if (!cfg.grid && cfg.points.empty())
        throw ConfigError("grid: a grid or a points list is required");
    if (!cfg.output.image.empty() && !cfg.grid)
        throw ConfigError("output.image: requires a grid");

    SolveOutcome outcome = runSolveInMemory(cfg, lp);

    if (!cfg.output.grid.empty()) {
        if (outcome.usedGrid)
            saveGridCsv(outcome.grid, cfg.output.grid);
        else
            writePointsCsv(cfg.output.grid, outcome);
    }
    if (!cfg.output.image.empty())
        saveGridImage(outcome.grid, cfg.output.image, !cfg.output.hasRange, cfg.output.lo,
                      cfg.output.hi);
    if (!cfg.output.report.empty()) writeReportCsv(cfg.output.report, outcome.report);

    long walks = 0, truncated = 0;
    for (const auto& r : outcome.report) {
        walks += r.walks + r.cacheWalks;
        truncated += r.truncated + r.cacheTruncated;
    }
    std::printf("%s: %zu points (%ld fallback), %d rounds, %ld walks (%ld truncated)\n",
                modeName(cfg.mode), outcome.pts.size(),
                outcome.report.empty() ? 0 : outcome.report.front().fallbackPoints, cfg.rounds,
                walks, truncated);
    return 0;
}

int runConverge(const RunConfig& cfg, std::vector<int> sweep, int nSeeds, const std::string& out) {
    LoadedProblem lp = materialize(cfg);
    if (!lp.exactU) throw ConfigError("converge: requires an analytic scene");
    if (!cfg.grid) throw ConfigError("converge: requires a grid");
    if (sweep.empty()) throw ConfigError("converge: the sweep list is empty");
    if (nSeeds < 1) throw ConfigError("converge: seeds must be >= 1");
    for (int n : sweep)
        if (n < 1) throw ConfigError("converge: sweep values must be >= 1");

    GridField reference = exactGrid(*cfg.grid, lp.exactU);

    std::ofstream file(out);
    if (!file) throw std::runtime_error("converge: cannot write \"" + out + "\"");
    file << "n,seed,rmse,seconds\n";

    std::vector<double> xs, ys;
    for (int n : sweep) {
        double meanRmse = 0.0;
        for (int s = 0; s < nSeeds; ++s) {
            RunConfig c2 = cfg;
            c2.seed = cfg.seed + uint64_t(s);
            if (cfg.mode == SolveMode::Bvc) {
                c2.cache.nBoundary = n;
                if (lp.problem.hasSource()) c2.cache.nSource = n;
            } else {
                c2.cache.walk.nWalks = n;
            }
            auto t0 = std::chrono::steady_clock::now();
            SolveOutcome outcome = runSolveInMemory(c2, lp);
            double secs = elapsed(t0);
            double err = rmse(outcome.grid, reference);
            meanRmse += err;
            file << n << ',' << s << ',' << fmt(err) << ',' << fmt(secs) << '\n';
        }
        xs.push_back(double(n));
        ys.push_back(meanRmse / nSeeds);
    }
    double slope = xs.size() >= 2 ? logLogSlope(xs, ys) : 0.0;
    file << "# slope " << fmt(slope) << '\n';
    if (!file) throw std::runtime_error("converge: write failed for \"" + out + "\"");
    std::printf("converge: %zu settings x %d seeds, slope %.4f\n", sweep.size(), nSeeds, slope);
    return 0;
}

int runStreamlines(const RunConfig& cfg) {
    LoadedProblem lp = materialize(cfg);
    if (cfg.mode != SolveMode::Bvc)
        throw ConfigError("streamlines: requires mode bvc (gradients come from the caches)");
    if (cfg.cache.sourceBall)
        throw ConfigError("streamlines: sourceBall mode does not support gradient splats");
    if (cfg.streamlines.seeds.empty()) throw ConfigError("streamlines.seeds: required");
    if (cfg.streamlines.output.empty()) throw ConfigError("streamlines.output: required");

    CacheConfig cc = cfg.cache;
    cc.threads = cfg.threads;
    double eps = cc.walk.resolvedEpsilon(lp.scene);
    RegionRequest req;
    req.offset = cc.offset;
    if (lp.subdomain) {
        req.mode = RegionRequest::Mode::Subdomain;
        req.subdomain = &*lp.subdomain;
    }
    SolveRegion region = buildSolveRegion(lp.scene, req, eps);

    // retained caches: tracing reuses them at every query without new walks
    std::vector<std::pair<BoundaryCache, SourceCache>> caches;
    for (int r = 0; r < cfg.rounds; ++r)
        caches.emplace_back(generateBoundaryCache(lp.scene, lp.problem, region, cc, cfg.seed, r),
                            generateSourceCache(lp.problem, region, cc, cfg.seed, r));
    SplatConfig scfg = makeSplatConfig(lp.scene, lp.problem, cc);
    scfg.threads = 1;

    // unit gradient at p; reason is "" while the trace can continue
    auto direction = [&](const Vector2& p, std::string& reason) -> Vector2 {
        if (!evaluable(lp.scene, &region, p)) {
            reason = "outside";
            return Vector2::Zero();
        }
        std::vector<EvaluationPoint> one(1);
        one[0].x = p;
        markEvaluationPoints(lp.scene, region, cc, one);
        if (one[0].fallback) { // no splats inside the offset band
            reason = "outside";
            return Vector2::Zero();
        }
        for (const auto& [bc, sc] : caches) splatGradient(bc, sc, one, scfg);
        Vector2 g = one[0].gradient();
        if (g.norm() < 1e-12) {
            reason = "zero-gradient";
            return Vector2::Zero();
        }
        return g.normalized();
    };

    std::ofstream file(cfg.streamlines.output);
    if (!file) throw std::runtime_error("streamlines: cannot write \"" + cfg.streamlines.output + "\"");
    file << "seed,step,x,y,reason\n";
    double h = cfg.streamlines.step;
    for (size_t s = 0; s < cfg.streamlines.seeds.size(); ++s) {
        Vector2 x = cfg.streamlines.seeds[s];
        std::string reason;
        direction(x, reason);
        if (reason == "outside") { // no polyline at all for seeds outside
            file << s << ",-1," << fmt(x.x()) << ',' << fmt(x.y()) << ",outside\n";
            continue;
        }
        file << s << ",0," << fmt(x.x()) << ',' << fmt(x.y()) << ",\n";
        std::string stop = reason; // may already be zero-gradient at the seed
        for (int k = 1; k <= cfg.streamlines.steps && stop.empty(); ++k) {
            Vector2 k1 = direction(x, stop);
            if (!stop.empty()) break;
            std::string probe;
            Vector2 k2 = direction(x + h * k1, probe);
            Vector2 next = probe.empty() ? Vector2(x + 0.5 * h * (k1 + k2)) // Heun step
                                         : Vector2(x + h * k1); // predictor left the region
            std::string landed;
            direction(next, landed);
            if (landed == "outside") {
                stop = "outside";
                break;
            }
            x = next;
            file << s << ',' << k << ',' << fmt(x.x()) << ',' << fmt(x.y()) << ",\n";
        }
        file << s << ",-1," << fmt(x.x()) << ',' << fmt(x.y()) << ','
             << (stop.empty() ? "ok" : stop) << '\n';
    }
    if (!file)
        throw std::runtime_error("streamlines: write failed for \"" + cfg.streamlines.output + "\"");
    std::printf("streamlines: %zu seeds, %d rounds of caches retained\n",
                cfg.streamlines.seeds.size(), cfg.rounds);
    return 0;
}

int runAblate(const RunConfig& cfg, const std::string& parameter, std::vector<double> values,
              int nSeeds, const std::string& out) {
    LoadedProblem lp = materialize(cfg);
    if (!lp.exactU) throw ConfigError("ablate: requires an analytic scene");
    if (!cfg.grid) throw ConfigError("ablate: requires a grid");
    if (cfg.mode != SolveMode::Bvc) throw ConfigError("ablate: requires mode bvc");
    if (nSeeds < 1) throw ConfigError("ablate: seeds must be >= 1");
    if (parameter != "l" && parameter != "c" && parameter != "mode")
        throw ConfigError("ablate: parameter must be l, c or mode");
    if (parameter == "c" && cfg.cache.clampMode == ClampMode::Off)
        throw ConfigError("ablate: the c sweep needs cache.clampMode = clamp-only or clamp+correct");

    double eps = cfg.cache.walk.resolvedEpsilon(lp.scene);
    if (values.empty()) {
        if (parameter == "l") values = {2.0, 5.0, 10.0}; // epsilon multiples
        else if (parameter == "c") values = {1.0, 2.0, 5.0, 10.0, 20.0};
        else values = {0.0, 1.0, 2.0}; // clamp-mode index
    }

    struct Setting {
        std::string label;
        RunConfig config;
    };
    std::vector<Setting> settings;
    for (double v : values) {
        RunConfig c2 = cfg;
        if (parameter == "l") {
            if (v <= 1.0) { // the offset must exceed the shell width
                std::fprintf(stderr, "ablate: l = %g epsilon rejected (must exceed epsilon)\n", v);
                continue;
            }
            c2.cache.offset = v * eps;
            settings.push_back({fmt(v), c2});
        } else if (parameter == "c") {
            if (!(v > 0.0)) {
                std::fprintf(stderr, "ablate: c = %g rejected (must be > 0)\n", v);
                continue;
            }
            c2.cache.clamp = v;
            settings.push_back({fmt(v), c2});
        } else {
            int m = int(v);
            if (m < 0 || m > 2) continue;
            c2.cache.clampMode = ClampMode(m);
            settings.push_back({clampModeName(c2.cache.clampMode), c2});
        }
    }
    if (settings.empty()) throw ConfigError("ablate: no admissible sweep values");

    std::ofstream file(out);
    if (!file) throw std::runtime_error("ablate: cannot write \"" + out + "\"");
    file << "parameter,setting,seed,interior_rmse,near_rmse,near_max_err,seconds\n";

    for (const auto& setting : settings) {
        // rebuild the region this setting uses to classify the near band
        RegionRequest req;
        req.offset = setting.config.cache.offset;
        if (lp.subdomain) {
            req.mode = RegionRequest::Mode::Subdomain;
            req.subdomain = &*lp.subdomain;
        }
        SolveRegion region = buildSolveRegion(lp.scene, req, eps);
        double band = 2.0 * region.offset;

        for (int s = 0; s < nSeeds; ++s) {
            RunConfig c2 = setting.config;
            c2.seed = cfg.seed + uint64_t(s);
            auto t0 = std::chrono::steady_clock::now();
            SolveOutcome outcome = runSolveInMemory(c2, lp);
            double secs = elapsed(t0);

            double sumIn = 0.0, sumNear = 0.0, maxNear = 0.0;
            long nIn = 0, nNear = 0;
            for (const auto& pt : outcome.pts) {
                if (pt.fallback || !pt.solutionDefined(outcome.hasSource)) continue;
                double err = pt.solution() - lp.exactU(pt.x);
                auto cp = region.boundary.closestPoint(pt.x);
                if (cp.valid && cp.dist < band) {
                    sumNear += err * err;
                    maxNear = std::max(maxNear, std::fabs(err));
                    ++nNear;
                } else {
                    sumIn += err * err;
                    ++nIn;
                }
            }
            double interior = nIn > 0 ? std::sqrt(sumIn / nIn) : 0.0;
            double near = nNear > 0 ? std::sqrt(sumNear / nNear) : 0.0;
            file << parameter << ',' << setting.label << ',' << s << ',' << fmt(interior) << ','
                 << fmt(near) << ',' << fmt(maxNear) << ',' << fmt(secs) << '\n';
        }
    }
    if (!file) throw std::runtime_error("ablate: write failed for \"" + out + "\"");
    std::printf("ablate: parameter %s, %zu settings x %d seeds\n", parameter.c_str(),
                settings.size(), nSeeds);
    return 0;
}

int runOracle(const std::string& problemName) {
    AnalyticProblem ap = analyticProblem(problemName);
    bool allOk = true;
    auto check = [&](const char* name, double got, double want, double tol) {
        bool ok = std::fabs(got - want) <= tol;
        allOk = allOk && ok;
        std::printf("[%s] %s: %.8f vs %.8f (err %.2e, tol %.0e)\n", ok ? "ok" : "FAIL", name, got,
                    want, std::fabs(got - want), tol);
    };

    // probe near the middle of the domain
    Vector2 lo = ap.scene.bounds.lo, hi = ap.scene.bounds.hi;
    Vector2 center = 0.5 * (lo + hi);
    Vector2 probe = center + 0.2 * (hi - center);
    if (!ap.scene.inside(probe)) probe = center; // annulus: the center is in the hole
    if (!ap.scene.inside(probe)) probe = 0.5 * (Vector2(hi.x(), center.y()) + center);

    if (!ap.problem.hasSource()) {
        double bie = denseBieQuadrature(
            ap.scene, ap.problem.kernel, [&](const Vector2& p) { return ap.exactU(p); },
            [&](const Vector2& p, int seg) { return ap.exactNormalDerivative(p, seg); }, probe);
        check("dense boundary-integral quadrature", bie, ap.exactU(probe), 5e-4);
    } else {
        std::printf("[--] dense boundary-integral quadrature: skipped (source term)\n");
    }

    WalkConfig wc;
    wc.nWalks = 2048;
    ScalarEstimate est = wostSolve(ap.scene, ap.problem, probe, wc);
    check("pointwise estimate", est.mean, ap.exactU(probe), 4.0 * est.se + 5e-3);

    bool rectangle = !ap.scene.hasNeumann() && ap.scene.vertices.size() <= 8;
    if (rectangle) {
        double h = (hi.x() - lo.x()) / 64.0;
        GridField fd = fdReference(ap.scene, ap.problem, h);
        double sum = 0.0;
        long n = 0;
        for (int iy = 0; iy < fd.ny; ++iy)
            for (int ix = 0; ix < fd.nx; ++ix) {
                if (!fd.validAt(ix, iy)) continue;
                double d = fd.at(ix, iy) - ap.exactU(fd.point(ix, iy));
                sum += d * d;
                ++n;
            }
        check("finite-difference reference rmse", n > 0 ? std::sqrt(sum / n) : 0.0, 0.0, 1e-3);
    } else {
        std::printf("[--] finite-difference reference: skipped (needs an all-Dirichlet rectangle)\n");
    }
    std::printf("%s\n", allOk ? "oracle checks passed" : "oracle checks FAILED");
    return allOk ? 0 : 3;
}

} // namespace bvc::cli
