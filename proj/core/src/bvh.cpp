#include "bvc/bvh.h"

#include <algorithm>

namespace bvc {

void Bvh::build(std::vector<Prim> inPrims) {
    nodes.clear();
    prims = std::move(inPrims);
    if (!prims.empty()) buildNode(0, static_cast<int>(prims.size()));
}

int Bvh::buildNode(int start, int count) {
    int nodeId = static_cast<int>(nodes.size());
    nodes.emplace_back();

    Aabb box;
    Aabb centroids;
    unsigned mask = 0;
    for (int i = start; i < start + count; i++) {
        box.expand(prims[i].a);
        box.expand(prims[i].b);
        centroids.expand(0.5 * (prims[i].a + prims[i].b));
        mask |= 1u << prims[i].label;
    }
    nodes[nodeId].box = box;
    nodes[nodeId].labelMask = mask;

    const int leafSize = 4;
    Vector2 extent = centroids.extent();
    if (count <= leafSize || extent.maxCoeff() <= 0.0) {
        nodes[nodeId].left = -1;
        nodes[nodeId].start = start;
        nodes[nodeId].count = count;
        return nodeId;
    }

    // median split on the longest centroid axis
    int axis = extent.x() >= extent.y() ? 0 : 1;
    int mid = start + count / 2;
    std::nth_element(prims.begin() + start, prims.begin() + mid, prims.begin() + start + count,
                     [axis](const Prim& p, const Prim& q) {
                         return p.a[axis] + p.b[axis] < q.a[axis] + q.b[axis];
                     });

    int left = buildNode(start, mid - start);
    int right = buildNode(mid, start + count - mid);
    nodes[nodeId].left = left;
    nodes[nodeId].right = right;
    return nodeId;
}

Bvh::ClosestResult Bvh::closestPoint(const Vector2& x, unsigned labelMask, double maxDist) const {
    ClosestResult result;
    double best = maxDist;
    nearTraversal(x, labelMask, best, [&](const Prim& prim) {
        double t;
        Vector2 p = closestPointOnSegment(x, prim.a, prim.b, t);
        double d = (p - x).norm();
        if (d < best) {
            best = d;
            result.id = prim.id;
            result.dist = d;
            result.t = t;
            result.point = p;
        }
    });
    return result;
}

bool Bvh::raySegment(const Vector2& o, const Vector2& d, const Vector2& a, const Vector2& b,
                     double tMax, RayHit& hit) {
    Vector2 e = b - a;
    double denom = cross2(d, e);
    if (std::abs(denom) < 1e-300) return false; // parallel (collinear treated as a miss)
    double t = cross2(a - o, e) / denom;
    double s = cross2(a - o, d) / denom;
    if (t <= 0.0 || t > tMax || s < 0.0 || s > 1.0) return false;
    hit.t = t;
    hit.s = s;
    hit.point = o + t * d;
    return true;
}

} // namespace bvc
