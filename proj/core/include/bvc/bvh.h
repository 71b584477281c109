#pragma once

#include <vector>

#include "bvc/vec.h"

namespace bvc {

struct Aabb {
    Vector2 lo = Vector2(Inf, Inf);
    Vector2 hi = Vector2(-Inf, -Inf);

    void expand(const Vector2& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    Vector2 extent() const { return hi - lo; }
    Vector2 centroid() const { return 0.5 * (lo + hi); }

    // squared distance from a point to the box (zero inside)
    double dist2(const Vector2& p) const {
        double dx = std::max({lo.x() - p.x(), 0.0, p.x() - hi.x()});
        double dy = std::max({lo.y() - p.y(), 0.0, p.y() - hi.y()});
        return dx * dx + dy * dy;
    }

    // slab test against the ray o + t*d over [0, tMax]
    bool hitByRay(const Vector2& o, const Vector2& invD, double tMax) const {
        double t0 = 0.0, t1 = tMax;
        for (int axis = 0; axis < 2; axis++) {
            double tn = (lo[axis] - o[axis]) * invD[axis];
            double tf = (hi[axis] - o[axis]) * invD[axis];
            if (tn > tf) std::swap(tn, tf);
            t0 = std::max(t0, tn);
            t1 = std::min(t1, tf);
            if (t0 > t1) return false;
        }
        return true;
    }
};

// binary AABB hierarchy over line segments with per-label traversal filtering;
// labels are small integers, filtered through a bit mask
class Bvh {
public:
    struct Prim {
        Vector2 a, b;
        int label = 0;
        int id = 0; // caller-side segment index
    };

    struct ClosestResult {
        int id = -1;
        double dist = Inf;
        double t = 0.0; // parameter along the segment, clamped to [0, 1]
        Vector2 point = Vector2::Zero();
    };

    struct RayHit {
        int id = -1;
        double t = Inf;   // distance along the ray
        double s = 0.0;   // parameter along the segment
        Vector2 point = Vector2::Zero();
    };

    void build(std::vector<Prim> prims);
    bool empty() const { return nodes.empty(); }

    // closest point on any segment whose label bit is set in the mask
    ClosestResult closestPoint(const Vector2& x, unsigned labelMask, double maxDist = Inf) const;

    // best-first traversal: visit(prim) may lower `best` to tighten pruning
    template <class Visitor>
    void nearTraversal(const Vector2& x, unsigned labelMask, double& best, Visitor&& visit) const {
        if (nodes.empty()) return;
        visitNear(0, x, labelMask, best, visit);
    }

    // visits every filtered segment intersected by the ray; visit(prim, hit) may
    // lower `tMax` to prune (first-hit queries) or leave it (all-hits queries)
    template <class Visitor>
    void rayTraversal(const Vector2& o, const Vector2& d, double& tMax, unsigned labelMask,
                      Visitor&& visit) const {
        if (nodes.empty()) return;
        Vector2 invD(1.0 / d.x(), 1.0 / d.y());
        visitRay(0, o, d, invD, tMax, labelMask, visit);
    }

    // exact ray/segment intersection, shared with the brute-force fallback
    static bool raySegment(const Vector2& o, const Vector2& d, const Vector2& a, const Vector2& b,
                           double tMax, RayHit& hit);

private:
    struct Node {
        Aabb box;
        unsigned labelMask = 0; // union of leaf labels below this node
        int left = -1, right = -1; // child indices; leaves keep -1
        int start = 0, count = 0;
    };

    int buildNode(int start, int count);

    template <class Visitor>
    void visitNear(int nodeId, const Vector2& x, unsigned labelMask, double& best,
                   Visitor&& visit) const {
        const Node& node = nodes[nodeId];
        if ((node.labelMask & labelMask) == 0) return;
        if (node.box.dist2(x) > best * best) return;
        if (node.left < 0) {
            for (int i = node.start; i < node.start + node.count; i++) {
                if ((1u << prims[i].label) & labelMask) visit(prims[i]);
            }
            return;
        }
        int l = node.left, r = node.right;
        double dl = nodes[l].box.dist2(x), dr = nodes[r].box.dist2(x);
        if (dl > dr) std::swap(l, r);
        visitNear(l, x, labelMask, best, visit);
        visitNear(r, x, labelMask, best, visit);
    }

    template <class Visitor>
    void visitRay(int nodeId, const Vector2& o, const Vector2& d, const Vector2& invD,
                  double& tMax, unsigned labelMask, Visitor&& visit) const {
        const Node& node = nodes[nodeId];
        if ((node.labelMask & labelMask) == 0) return;
        if (!node.box.hitByRay(o, invD, tMax)) return;
        if (node.left < 0) {
            for (int i = node.start; i < node.start + node.count; i++) {
                const Prim& prim = prims[i];
                if (((1u << prim.label) & labelMask) == 0) continue;
                RayHit hit;
                if (raySegment(o, d, prim.a, prim.b, tMax, hit)) {
                    hit.id = prim.id;
                    visit(prim, hit);
                }
            }
            return;
        }
        visitRay(node.left, o, d, invD, tMax, labelMask, visit);
        visitRay(node.right, o, d, invD, tMax, labelMask, visit);
    }

    std::vector<Node> nodes;
    std::vector<Prim> prims;
};

// closest point on one segment
inline Vector2 closestPointOnSegment(const Vector2& x, const Vector2& a, const Vector2& b,
                                     double& t) {
    Vector2 u = b - a;
    double len2 = u.squaredNorm();
    t = len2 > 0.0 ? std::clamp((x - a).dot(u) / len2, 0.0, 1.0) : 0.0;
    return a + t * u;
}

} // namespace bvc
