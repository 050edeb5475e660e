#include "graspsynth/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace graspsynth {

bool Aabb::intersects_ray(const Vec3& origin, const Vec3& inv_dir, double t_max) const {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double near = (lo[k] - origin[k]) * inv_dir[k];
    double far = (hi[k] - origin[k]) * inv_dir[k];
    if (std::isnan(near) || std::isnan(far)) {
      // Ray parallel to this slab: inside check
      if (origin[k] < lo[k] || origin[k] > hi[k]) return false;
      continue;
    }
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

namespace {
constexpr int kLeafSize = 8;

int longest_axis(const Aabb& box) {
  const Vec3 ext = box.hi - box.lo;
  int axis = 0;
  if (ext.y() > ext.x()) axis = 1;
  if (ext.z() > ext[axis]) axis = 2;
  return axis;
}
}  // namespace

PointBvh::PointBvh(const std::vector<Vec3>& points) : points_(points) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()));
}

int PointBvh::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  for (int i = begin; i < end; ++i) node.box.expand(points_[order_[i]]);
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin > kLeafSize) {
    const int axis = longest_axis(node.box);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       if (points_[a][axis] != points_[b][axis])
                         return points_[a][axis] < points_[b][axis];
                       return a < b;
                     });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
  }
  return id;
}

std::vector<int> PointBvh::radius_query(const Vec3& center, double radius) const {
  std::vector<int> out;
  if (root_ < 0) return out;
  const double r2 = radius * radius;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.box.dist2(center) > r2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        if ((points_[idx] - center).squaredNorm() <= r2) out.push_back(idx);
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> PointBvh::knn(const Vec3& center, int k) const {
  k = std::min<int>(k, static_cast<int>(points_.size()));
  if (k <= 0 || root_ < 0) return {};
  using Entry = std::pair<double, int>;  // (dist2, index)
  std::priority_queue<Entry> best;       // max-heap on distance
  auto worst = [&] { return best.size() < static_cast<std::size_t>(k)
                                ? std::numeric_limits<double>::max()
                                : best.top().first; };
  std::vector<std::pair<double, int>> stack{{nodes_[root_].box.dist2(center), root_}};
  while (!stack.empty()) {
    auto [d2, id] = stack.back();
    stack.pop_back();
    if (d2 > worst()) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const double dist2 = (points_[idx] - center).squaredNorm();
        const Entry e{dist2, idx};
        if (best.size() < static_cast<std::size_t>(k)) {
          best.push(e);
        } else if (e < best.top()) {  // ties resolved toward lower index
          best.pop();
          best.push(e);
        }
      }
    } else {
      const double dl = nodes_[node.left].box.dist2(center);
      const double dr = nodes_[node.right].box.dist2(center);
      // Visit the nearer child last so it is popped first.
      if (dl > dr) {
        stack.push_back({dl, node.left});
        stack.push_back({dr, node.right});
      } else {
        stack.push_back({dr, node.right});
        stack.push_back({dl, node.left});
      }
    }
  }
  std::vector<Entry> entries;
  entries.reserve(best.size());
  while (!best.empty()) {
    entries.push_back(best.top());
    best.pop();
  }
  std::sort(entries.begin(), entries.end());
  std::vector<int> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.second);
  return out;
}

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  constexpr double kParallelEps = 1e-14;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kParallelEps) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= 1e-12) return std::nullopt;
  return t;
}

MeshBvh::MeshBvh(const std::vector<std::pair<const TriangleMesh*, RigidTransform>>& instances) {
  for (std::size_t inst = 0; inst < instances.size(); ++inst) {
    const TriangleMesh& mesh = *instances[inst].first;
    const RigidTransform& pose = instances[inst].second;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      tris_.push_back({pose.apply(mesh.vertices[tri[0]]), pose.apply(mesh.vertices[tri[1]]),
                       pose.apply(mesh.vertices[tri[2]]), static_cast<int>(inst),
                       static_cast<int>(t)});
    }
  }
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!tris_.empty()) root_ = build(0, static_cast<int>(tris_.size()));
}

int MeshBvh::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  for (int i = begin; i < end; ++i) {
    const Tri& t = tris_[order_[i]];
    node.box.expand(t.a);
    node.box.expand(t.b);
    node.box.expand(t.c);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin > kLeafSize) {
    const int axis = longest_axis(node.box);
    const int mid = (begin + end) / 2;
    auto centroid = [&](int i) { return (tris_[i].a[axis] + tris_[i].b[axis] + tris_[i].c[axis]) / 3.0; };
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       const double ca = centroid(a), cb = centroid(b);
                       if (ca != cb) return ca < cb;
                       return a < b;
                     });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
  }
  return id;
}

std::optional<RayHit> MeshBvh::raycast(const Vec3& origin, const UnitVec3& direction) const {
  if (root_ < 0) return std::nullopt;
  const Vec3& dir = direction.vec();
  const Vec3 inv_dir = dir.cwiseInverse();
  double best_t = std::numeric_limits<double>::max();
  int best = -1;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!node.box.intersects_ray(origin, inv_dir, best_t)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const Tri& tri = tris_[idx];
        if (auto t = ray_triangle(origin, dir, tri.a, tri.b, tri.c)) {
          if (*t < best_t || (*t == best_t && (best < 0 || idx < best))) {
            best_t = *t;
            best = idx;
          }
        }
      }
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  if (best < 0) return std::nullopt;
  const Tri& tri = tris_[best];
  Vec3 n = (tri.b - tri.a).cross(tri.c - tri.a).normalized();
  if (n.dot(dir) > 0.0) n = -n;
  RayHit hit;
  hit.distance = best_t;
  hit.point = origin + best_t * dir;
  hit.normal = UnitVec3(n);
  hit.instance = tri.instance;
  hit.triangle = tri.triangle;
  return hit;
}

std::optional<RayHit> ray_cast(
    const std::vector<std::pair<const TriangleMesh*, RigidTransform>>& meshes,
    const Vec3& origin, const UnitVec3& direction) {
  return MeshBvh(meshes).raycast(origin, direction);
}

}  // namespace graspsynth
