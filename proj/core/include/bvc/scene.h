#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvc/bvh.h"
#include "bvc/vec.h"

namespace bvc {

// raised on malformed scene files, configs, or invalid build inputs
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BoundaryLabel { Dirichlet = 0, Neumann = 1 };

enum class QueryFilter { Any, DirichletOnly, NeumannOnly };

inline unsigned filterMask(QueryFilter f) {
    switch (f) {
        case QueryFilter::DirichletOnly: return 1u << 0;
        case QueryFilter::NeumannOnly: return 1u << 1;
        default: return ~0u;
    }
}

struct SegmentSpec {
    int a = 0, b = 0;
    BoundaryLabel label = BoundaryLabel::Dirichlet;
};

struct Segment {
    int a = 0, b = 0;
    BoundaryLabel label = BoundaryLabel::Dirichlet;
    Vector2 normal = Vector2::Zero(); // unit, outward for counterclockwise loops
    double length = 0.0;
    int loop = -1;                    // loop/chain id
    double arcOffset = 0.0;           // arc-length offset of vertex a within its loop
};

struct ClosestPointResult {
    bool valid = false;
    Vector2 point = Vector2::Zero();
    double dist = Inf;
    int segment = -1;
    double t = 0.0; // parameter along the segment
};

struct RayHitResult {
    Vector2 point = Vector2::Zero();
    double t = Inf; // distance along the (unit) ray direction
    double s = 0.0; // parameter along the segment
    int segment = -1;
};

// candidate vertex for visibility-silhouette queries on the Neumann boundary
struct SilhouetteVertex {
    Vector2 p = Vector2::Zero();
    Vector2 n1 = Vector2::Zero(), n2 = Vector2::Zero(); // adjacent Neumann segment normals
    bool always = false;                                // open chain end: silhouette from everywhere
};

// boundary mesh of line segments with labels, acceleration structure, and the
// derived quantities the solvers need (normals, lengths, loops, silhouettes)
class Scene {
public:
    std::vector<Vector2> vertices;
    std::vector<Segment> segments;
    std::vector<std::vector<int>> loops; // ordered segment ids per loop/chain
    std::vector<double> loopLengths;
    std::vector<bool> loopClosed;
    std::vector<SilhouetteVertex> silhouettes;

    Aabb bounds;
    double diagonal = 0.0;
    double dirichletLength = 0.0, neumannLength = 0.0, totalLength = 0.0;

    // builds normals, loops, lengths, and the acceleration structure; throws
    // ParseError on out-of-range indices, zero-length segments, or non-manifold
    // / inconsistently oriented connectivity
    static Scene build(std::vector<Vector2> vertices, const std::vector<SegmentSpec>& specs);

    bool hasNeumann() const { return neumannLength > 0.0; }
    bool closed() const;

    Vector2 segmentPoint(int segId, double t) const {
        const Segment& s = segments[segId];
        return vertices[s.a] + t * (vertices[s.b] - vertices[s.a]);
    }

    // closest point on the filtered boundary subset
    ClosestPointResult closestPoint(const Vector2& x, QueryFilter filter = QueryFilter::Any) const;
    ClosestPointResult closestPointBrute(const Vector2& x,
                                         QueryFilter filter = QueryFilter::Any) const;

    // distance to the closest Neumann silhouette vertex visible from x (Inf if none)
    double silhouetteDistance(const Vector2& x) const;
    double silhouetteDistanceBrute(const Vector2& x) const;

    // first boundary hit along the ray o + t*d with t in (tMin, tMax]
    std::optional<RayHitResult> intersectRay(const Vector2& o, const Vector2& d, double tMax = Inf,
                                             QueryFilter filter = QueryFilter::Any,
                                             double tMin = 0.0) const;
    std::optional<RayHitResult> intersectRayBrute(const Vector2& o, const Vector2& d,
                                                  double tMax = Inf,
                                                  QueryFilter filter = QueryFilter::Any,
                                                  double tMin = 0.0) const;

    // every boundary hit along the ray, unsorted
    std::vector<RayHitResult> allRayHits(const Vector2& o, const Vector2& d, double tMax = Inf,
                                         double tMin = 0.0) const;

    // crossing-parity test, boundary-inclusive within 1e-9 * diagonal
    bool inside(const Vector2& x) const;

private:
    Bvh bvh;
    std::vector<std::array<int, 2>> segmentSilhouettes; // candidate ids per segment endpoint

    bool silhouetteTest(const SilhouetteVertex& v, const Vector2& x) const;
};

// plain-text scene files: `v x y` vertices, `s i j D|N` segments, `#` comments
Scene loadScene(const std::string& path);
void saveScene(const Scene& scene, const std::string& path);

} // namespace bvc
