#include "bvc/scene.h"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace bvc {

Scene Scene::build(std::vector<Vector2> vertices, const std::vector<SegmentSpec>& specs) {
    Scene scene;
    scene.vertices = std::move(vertices);
    int nv = static_cast<int>(scene.vertices.size());
    if (nv == 0 || specs.empty()) throw ParseError("scene has no geometry");

    for (const Vector2& v : scene.vertices) scene.bounds.expand(v);
    scene.diagonal = scene.bounds.extent().norm();
    double lengthFloor = 1e-12 * std::max(scene.diagonal, 1.0);

    scene.segments.reserve(specs.size());
    for (size_t i = 0; i < specs.size(); i++) {
        const SegmentSpec& spec = specs[i];
        if (spec.a < 0 || spec.a >= nv || spec.b < 0 || spec.b >= nv)
            throw ParseError("segment " + std::to_string(i) + " references out-of-range vertex");
        Vector2 d = scene.vertices[spec.b] - scene.vertices[spec.a];
        double len = d.norm();
        if (len <= lengthFloor)
            throw ParseError("segment " + std::to_string(i) + " has zero length");
        Segment seg;
        seg.a = spec.a;
        seg.b = spec.b;
        seg.label = spec.label;
        seg.length = len;
        seg.normal = outwardNormal(d / len);
        scene.segments.push_back(seg);
        if (spec.label == BoundaryLabel::Dirichlet) scene.dirichletLength += len;
        else scene.neumannLength += len;
        scene.totalLength += len;
    }

    // connectivity: at most one outgoing and one incoming segment per vertex
    std::vector<int> outSeg(nv, -1), inSeg(nv, -1);
    for (size_t i = 0; i < scene.segments.size(); i++) {
        const Segment& seg = scene.segments[i];
        if (outSeg[seg.a] >= 0 || inSeg[seg.b] >= 0)
            throw ParseError("non-manifold or inconsistently oriented connectivity at segment " +
                             std::to_string(i));
        outSeg[seg.a] = static_cast<int>(i);
        inSeg[seg.b] = static_cast<int>(i);
    }

    // trace loops/chains; open chains start at vertices with no incoming segment
    std::vector<bool> visited(scene.segments.size(), false);
    auto trace = [&](int startSeg) {
        int loopId = static_cast<int>(scene.loops.size());
        scene.loops.emplace_back();
        double arc = 0.0;
        int cur = startSeg;
        bool isClosed = false;
        while (cur >= 0 && !visited[cur]) {
            visited[cur] = true;
            Segment& seg = scene.segments[cur];
            seg.loop = loopId;
            seg.arcOffset = arc;
            arc += seg.length;
            scene.loops.back().push_back(cur);
            cur = outSeg[seg.b];
            if (cur == startSeg) {
                isClosed = true;
                break;
            }
        }
        scene.loopLengths.push_back(arc);
        scene.loopClosed.push_back(isClosed);
    };
    for (size_t i = 0; i < scene.segments.size(); i++) {
        int a = scene.segments[i].a;
        if (!visited[i] && inSeg[a] < 0) trace(static_cast<int>(i));
    }
    for (size_t i = 0; i < scene.segments.size(); i++) {
        if (!visited[i]) trace(static_cast<int>(i));
    }

    // silhouette candidates on the Neumann subset
    scene.segmentSilhouettes.assign(scene.segments.size(), {-1, -1});
    auto neumann = [&](int segId) {
        return segId >= 0 && scene.segments[segId].label == BoundaryLabel::Neumann;
    };
    for (int v = 0; v < nv; v++) {
        int sIn = inSeg[v], sOut = outSeg[v];
        bool nIn = neumann(sIn), nOut = neumann(sOut);
        if (!nIn && !nOut) continue;
        SilhouetteVertex cand;
        cand.p = scene.vertices[v];
        if (nIn && nOut) {
            cand.n1 = scene.segments[sIn].normal;
            cand.n2 = scene.segments[sOut].normal;
        } else if ((nIn && sOut < 0) || (nOut && sIn < 0)) {
            cand.always = true; // open chain end
        } else {
            continue; // junction with Dirichlet: the Dirichlet distance already bounds the star
        }
        int id = static_cast<int>(scene.silhouettes.size());
        scene.silhouettes.push_back(cand);
        if (nIn) {
            auto& slots = scene.segmentSilhouettes[sIn];
            (slots[0] < 0 ? slots[0] : slots[1]) = id;
        }
        if (nOut) {
            auto& slots = scene.segmentSilhouettes[sOut];
            (slots[0] < 0 ? slots[0] : slots[1]) = id;
        }
    }

    std::vector<Bvh::Prim> prims;
    prims.reserve(scene.segments.size());
    for (size_t i = 0; i < scene.segments.size(); i++) {
        const Segment& seg = scene.segments[i];
        prims.push_back({scene.vertices[seg.a], scene.vertices[seg.b],
                         static_cast<int>(seg.label), static_cast<int>(i)});
    }
    scene.bvh.build(std::move(prims));
    return scene;
}

bool Scene::closed() const {
    for (bool c : loopClosed)
        if (!c) return false;
    return !loopClosed.empty();
}

ClosestPointResult Scene::closestPoint(const Vector2& x, QueryFilter filter) const {
    Bvh::ClosestResult r = bvh.closestPoint(x, filterMask(filter));
    ClosestPointResult result;
    if (r.id >= 0) {
        result.valid = true;
        result.point = r.point;
        result.dist = r.dist;
        result.segment = r.id;
        result.t = r.t;
    }
    return result;
}

ClosestPointResult Scene::closestPointBrute(const Vector2& x, QueryFilter filter) const {
    ClosestPointResult result;
    unsigned mask = filterMask(filter);
    for (size_t i = 0; i < segments.size(); i++) {
        const Segment& seg = segments[i];
        if (((1u << static_cast<int>(seg.label)) & mask) == 0) continue;
        double t;
        Vector2 p = closestPointOnSegment(x, vertices[seg.a], vertices[seg.b], t);
        double d = (p - x).norm();
        if (d < result.dist) {
            result.valid = true;
            result.point = p;
            result.dist = d;
            result.segment = static_cast<int>(i);
            result.t = t;
        }
    }
    return result;
}

bool Scene::silhouetteTest(const SilhouetteVertex& v, const Vector2& x) const {
    if (v.always) return true;
    // sign flip of n.(v - x) between the two adjacent segments, ties included
    double d1 = v.n1.dot(v.p - x);
    double d2 = v.n2.dot(v.p - x);
    return d1 * d2 <= 0.0;
}

double Scene::silhouetteDistance(const Vector2& x) const {
    double best = Inf;
    bvh.nearTraversal(x, filterMask(QueryFilter::NeumannOnly), best, [&](const Bvh::Prim& prim) {
        for (int slot : segmentSilhouettes[prim.id]) {
            if (slot < 0) continue;
            const SilhouetteVertex& v = silhouettes[slot];
            double d = (v.p - x).norm();
            if (d < best && silhouetteTest(v, x)) best = d;
        }
    });
    return best;
}

double Scene::silhouetteDistanceBrute(const Vector2& x) const {
    double best = Inf;
    for (const SilhouetteVertex& v : silhouettes) {
        double d = (v.p - x).norm();
        if (d < best && silhouetteTest(v, x)) best = d;
    }
    return best;
}

std::optional<RayHitResult> Scene::intersectRay(const Vector2& o, const Vector2& d, double tMax,
                                                QueryFilter filter, double tMin) const {
    Bvh::RayHit best;
    double limit = tMax;
    bvh.rayTraversal(o, d, limit, filterMask(filter), [&](const Bvh::Prim&, const Bvh::RayHit& hit) {
        if (hit.t > tMin && hit.t < best.t) {
            best = hit;
            limit = hit.t; // tighten traversal pruning
        }
    });
    if (best.id < 0) return std::nullopt;
    return RayHitResult{best.point, best.t, best.s, best.id};
}

std::optional<RayHitResult> Scene::intersectRayBrute(const Vector2& o, const Vector2& d,
                                                     double tMax, QueryFilter filter,
                                                     double tMin) const {
    RayHitResult best;
    unsigned mask = filterMask(filter);
    bool found = false;
    for (size_t i = 0; i < segments.size(); i++) {
        const Segment& seg = segments[i];
        if (((1u << static_cast<int>(seg.label)) & mask) == 0) continue;
        Bvh::RayHit hit;
        if (Bvh::raySegment(o, d, vertices[seg.a], vertices[seg.b], tMax, hit) && hit.t > tMin &&
            hit.t < best.t) {
            best = {hit.point, hit.t, hit.s, static_cast<int>(i)};
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

std::vector<RayHitResult> Scene::allRayHits(const Vector2& o, const Vector2& d, double tMax,
                                            double tMin) const {
    std::vector<RayHitResult> hits;
    double limit = tMax;
    bvh.rayTraversal(o, d, limit, ~0u, [&](const Bvh::Prim&, const Bvh::RayHit& hit) {
        if (hit.t > tMin) hits.push_back({hit.point, hit.t, hit.s, hit.id});
    });
    return hits;
}

bool Scene::inside(const Vector2& x) const {
    // boundary-inclusive: points within a sliver of the boundary count as inside
    ClosestPointResult cp = closestPoint(x);
    if (cp.valid && cp.dist <= 1e-9 * diagonal) return true;
    // crossing parity along +x using the straddle form, robust at shared vertices
    bool in = false;
    for (const Segment& seg : segments) {
        const Vector2& a = vertices[seg.a];
        const Vector2& b = vertices[seg.b];
        if ((a.y() > x.y()) == (b.y() > x.y())) continue;
        double xCross = a.x() + (x.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
        if (x.x() < xCross) in = !in;
    }
    return in;
}

Scene loadScene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);
    std::vector<Vector2> vertices;
    std::vector<SegmentSpec> specs;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        lineNo++;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        auto fail = [&](const std::string& what) {
            throw ParseError(path + ":" + std::to_string(lineNo) + ": " + what);
        };
        if (tag == "v") {
            double x, y;
            if (!(ls >> x >> y)) fail("malformed vertex line");
            vertices.emplace_back(x, y);
        } else if (tag == "s") {
            SegmentSpec spec;
            std::string label;
            if (!(ls >> spec.a >> spec.b >> label)) fail("malformed segment line");
            if (spec.a < 0 || spec.a >= static_cast<int>(vertices.size()) || spec.b < 0 ||
                spec.b >= static_cast<int>(vertices.size()))
                fail("segment references out-of-range vertex");
            if (label == "D") spec.label = BoundaryLabel::Dirichlet;
            else if (label == "N") spec.label = BoundaryLabel::Neumann;
            else fail("unknown boundary label '" + label + "'");
            specs.push_back(spec);
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    return Scene::build(std::move(vertices), specs);
}

void saveScene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write scene file: " + path);
    char buf[128];
    for (const Vector2& v : scene.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g\n", v.x(), v.y());
        out << buf;
    }
    for (const Segment& seg : scene.segments) {
        out << "s " << seg.a << " " << seg.b << " "
            << (seg.label == BoundaryLabel::Dirichlet ? "D" : "N") << "\n";
    }
}

} // namespace bvc
