#pragma once

#include <vector>

#include "bvc/rng.h"
#include "bvc/scene.h"

namespace bvc {

struct BoundaryPointSample {
    Vector2 p = Vector2::Zero();
    Vector2 n = Vector2::Zero();
    double pdf = 0.0;     // 1 / (total sampled length)
    int segment = -1;
    double arc = 0.0;     // arc-length coordinate within the segment's loop
};

// uniform-by-arc-length boundary sampling through a CDF table over segments
class BoundarySampler {
public:
    BoundarySampler(const Scene& scene, QueryFilter filter = QueryFilter::Any);

    // draws `count` samples; with `stratified`, the CDF inputs are jittered strata
    void sample(int count, bool stratified, Rng& rng, std::vector<BoundaryPointSample>& out) const;

    double totalLength() const { return length; }

private:
    BoundaryPointSample fromUnit(double u) const;

    const Scene* scene;
    std::vector<int> segmentIds;
    std::vector<double> cdf; // cumulative lengths over selected segments
    double length = 0.0;
};

struct RegionPointSample {
    Vector2 p = Vector2::Zero();
    double pdf = 0.0; // 1 / area
};

// uniform sampling of a closed region's interior by rejection from its bounding
// box; stratification jitters a shuffled grid of proposal cells before rejection
class RegionSampler {
public:
    // `loops` must describe closed loops; area is the shoelace area (holes negative)
    explicit RegionSampler(const Scene& loops);

    void sample(int count, bool stratified, Rng& rng, std::vector<RegionPointSample>& out) const;

    double area() const { return regionArea; }

private:
    const Scene* loops;
    double regionArea = 0.0;
};

// signed shoelace area of all closed loops (CCW positive, holes drawn CW negative)
double loopArea(const Scene& loops);

// 1D Voronoi cell lengths along a closed loop: half the arc gap to each neighbor.
// `arcs` must be sorted arc-length positions on a loop of length `loopLength`.
std::vector<double> voronoiWeights(const std::vector<double>& arcs, double loopLength);

} // namespace bvc
