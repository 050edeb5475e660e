#pragma once

#include <limits>
#include <utility>

#include "graspsynth/geometry.hpp"

namespace graspsynth {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  // Squared distance from a point to the box (0 inside).
  double dist2(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
  bool intersects_ray(const Vec3& origin, const Vec3& inv_dir, double t_max) const;
};

// Bounding-volume hierarchy over points. Median split on the longest axis,
// immutable after construction. Queries are exact (tested against
// exhaustive scans).
class PointBvh {
 public:
  PointBvh() = default;
  explicit PointBvh(const std::vector<Vec3>& points);

  // Indices of all points with ||p - center|| <= radius, ascending.
  std::vector<int> radius_query(const Vec3& center, double radius) const;

  // k nearest points, ordered by (distance, index). k is clamped to size.
  std::vector<int> knn(const Vec3& center, int k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    Aabb box;
    int begin = 0, end = 0;   // leaf: range into order_
    int left = -1, right = -1;
  };
  int build(int begin, int end);

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

struct RayHit {
  double distance = 0.0;
  Vec3 point{0.0, 0.0, 0.0};
  UnitVec3 normal;      // geometric triangle normal, oriented against the ray
  int instance = -1;    // index into the (mesh, pose) list
  int triangle = -1;    // triangle index within that mesh
};

// BVH over the triangles of a set of posed meshes. Triangles are
// pre-transformed to world coordinates at build time.
class MeshBvh {
 public:
  MeshBvh() = default;
  explicit MeshBvh(const std::vector<std::pair<const TriangleMesh*, RigidTransform>>& instances);

  // Nearest positive-t intersection. Ties broken by triangle order.
  std::optional<RayHit> raycast(const Vec3& origin, const UnitVec3& direction) const;

  bool empty() const { return tris_.empty(); }

 private:
  struct Tri {
    Vec3 a, b, c;
    int instance, triangle;
  };
  struct Node {
    Aabb box;
    int begin = 0, end = 0;
    int left = -1, right = -1;
  };
  int build(int begin, int end);

  std::vector<Tri> tris_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Moller-Trumbore, inclusive edges. Returns parametric distance along the
// (unit) direction, or nothing for misses and rays parallel to the plane.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);

// One-shot convenience matching the spatial-query contract; builds a
// temporary BVH. Pipelines keep a MeshBvh instead.
std::optional<RayHit> ray_cast(
    const std::vector<std::pair<const TriangleMesh*, RigidTransform>>& meshes,
    const Vec3& origin, const UnitVec3& direction);

// Exact radius query through the index.
inline std::vector<int> nearest_neighbors(const PointBvh& index, const Vec3& query,
                                          double radius) {
  if (radius <= 0.0) throw std::invalid_argument("nearest_neighbors: radius must be > 0");
  return index.radius_query(query, radius);
}

}  // namespace graspsynth
