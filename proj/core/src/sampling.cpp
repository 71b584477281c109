#include "bvc/sampling.h"

#include <algorithm>
#include <numeric>

namespace bvc {

BoundarySampler::BoundarySampler(const Scene& scene, QueryFilter filter) : scene(&scene) {
    unsigned mask = filterMask(filter);
    for (size_t i = 0; i < scene.segments.size(); i++) {
        const Segment& seg = scene.segments[i];
        if (((1u << static_cast<int>(seg.label)) & mask) == 0) continue;
        segmentIds.push_back(static_cast<int>(i));
        length += seg.length;
        cdf.push_back(length);
    }
    if (segmentIds.empty()) throw ParseError("boundary sampler: no segments match the filter");
}

BoundaryPointSample BoundarySampler::fromUnit(double u) const {
    double target = u * length;
    size_t idx = std::lower_bound(cdf.begin(), cdf.end(), target) - cdf.begin();
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    int segId = segmentIds[idx];
    const Segment& seg = scene->segments[segId];
    double within = target - (idx > 0 ? cdf[idx - 1] : 0.0);
    double t = std::clamp(within / seg.length, 0.0, 1.0);
    BoundaryPointSample s;
    s.p = scene->segmentPoint(segId, t);
    s.n = seg.normal;
    s.pdf = 1.0 / length;
    s.segment = segId;
    s.arc = seg.arcOffset + t * seg.length;
    return s;
}

void BoundarySampler::sample(int count, bool stratified, Rng& rng,
                             std::vector<BoundaryPointSample>& out) const {
    out.reserve(out.size() + count);
    for (int k = 0; k < count; k++) {
        double u = stratified ? (k + rng.uniform()) / count : rng.uniform();
        out.push_back(fromUnit(u));
    }
}

double loopArea(const Scene& loops) {
    double area = 0.0;
    for (const Segment& seg : loops.segments) {
        const Vector2& a = loops.vertices[seg.a];
        const Vector2& b = loops.vertices[seg.b];
        area += 0.5 * cross2(a, b);
    }
    return area;
}

RegionSampler::RegionSampler(const Scene& loops) : loops(&loops) {
    if (!loops.closed()) throw ParseError("region sampler requires closed loops");
    regionArea = loopArea(loops);
    if (regionArea <= 0.0) throw ParseError("region sampler: non-positive area");
}

void RegionSampler::sample(int count, bool stratified, Rng& rng,
                           std::vector<RegionPointSample>& out) const {
    const Aabb& box = loops->bounds;
    Vector2 extent = box.extent();
    double pdf = 1.0 / regionArea;
    out.reserve(out.size() + count);

    long proposals = 0, accepted = 0;
    auto guard = [&]() {
        if (proposals >= 1000000 && accepted < proposals / 10000)
            throw ParseError("degenerate region: rejection acceptance rate below 1e-4");
    };

    if (!stratified) {
        while (accepted < count) {
            proposals++;
            guard();
            Vector2 p = box.lo + Vector2(rng.uniform() * extent.x(), rng.uniform() * extent.y());
            if (loops->inside(p)) {
                out.push_back({p, pdf});
                accepted++;
            }
        }
        return;
    }

    // jittered strata over the bounding box, visited in shuffled order so that
    // truncating the final pass keeps every sample marginally uniform in R
    int g = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))));
    std::vector<int> order(static_cast<size_t>(g) * g);
    std::iota(order.begin(), order.end(), 0);
    while (accepted < count) {
        for (size_t i = order.size(); i > 1; i--) std::swap(order[i - 1], order[rng.below(i)]);
        for (int cell : order) {
            if (accepted >= count) break;
            proposals++;
            guard();
            int cx = cell % g, cy = cell / g;
            Vector2 p = box.lo + Vector2((cx + rng.uniform()) / g * extent.x(),
                                         (cy + rng.uniform()) / g * extent.y());
            if (loops->inside(p)) {
                out.push_back({p, pdf});
                accepted++;
            }
        }
    }
}

std::vector<double> voronoiWeights(const std::vector<double>& arcs, double loopLength) {
    size_t n = arcs.size();
    if (n == 0) return {};
    if (n == 1) return {loopLength};
    std::vector<double> weights(n);
    for (size_t i = 0; i < n; i++) {
        double prevGap = i > 0 ? arcs[i] - arcs[i - 1] : arcs[0] + loopLength - arcs[n - 1];
        double nextGap = i + 1 < n ? arcs[i + 1] - arcs[i] : arcs[0] + loopLength - arcs[n - 1];
        weights[i] = 0.5 * (prevGap + nextGap);
    }
    return weights;
}

} // namespace bvc
