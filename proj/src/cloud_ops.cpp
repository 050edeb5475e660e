#include "graspsynth/cloud_ops.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "graspsynth/rng.hpp"

namespace graspsynth {

namespace {

std::uint64_t voxel_key(const Vec3& p, double inv_leaf) {
  const auto cell = [&](double x) {
    return static_cast<std::int64_t>(std::floor(x * inv_leaf));
  };
  // 21 bits per axis, offset to keep coordinates positive. Desk-scale
  // clouds are far inside the range.
  const std::uint64_t bias = 1u << 20;
  const std::uint64_t cx = static_cast<std::uint64_t>(cell(p.x()) + bias);
  const std::uint64_t cy = static_cast<std::uint64_t>(cell(p.y()) + bias);
  const std::uint64_t cz = static_cast<std::uint64_t>(cell(p.z()) + bias);
  return (cx << 42) | (cy << 21) | cz;
}

// Least-squares plane normal of a point set (smallest covariance
// eigenvector). Falls back to +z for fully degenerate input.
Vec3 plane_fit_normal(const std::vector<Vec3>& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  Vec3 n = solver.eigenvectors().col(0);
  const double norm = n.norm();
  if (norm < 1e-12) return Vec3(0.0, 0.0, 1.0);
  return n / norm;
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  return voxel_downsample_map(cloud, leaf, nullptr);
}

PointCloud voxel_downsample_map(const PointCloud& cloud, double leaf,
                                std::vector<int>* first_member) {
  if (leaf <= 0.0) throw std::invalid_argument("voxel_downsample: leaf must be > 0");
  PointCloud out;
  if (first_member) first_member->clear();
  if (cloud.empty()) return out;

  struct Cell {
    Vec3 sum;
    int count;
    int slot;
  };
  const double inv_leaf = 1.0 / leaf;
  std::unordered_map<std::uint64_t, Cell> cells;
  cells.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::uint64_t key = voxel_key(cloud.points[i], inv_leaf);
    auto [it, inserted] = cells.try_emplace(key, Cell{cloud.points[i], 1, -1});
    if (inserted) {
      it->second.slot = static_cast<int>(out.points.size());
      out.points.push_back(Vec3::Zero());  // placeholder, filled below
      if (first_member) first_member->push_back(static_cast<int>(i));
    } else {
      it->second.sum += cloud.points[i];
      it->second.count += 1;
    }
  }
  for (const auto& [key, cell] : cells) {
    out.points[cell.slot] = cell.sum / static_cast<double>(cell.count);
  }
  return out;
}

void estimate_raw_normals(PointCloud& cloud, int k, const Vec3& view_origin) {
  if (k < 3) throw std::invalid_argument("estimate_raw_normals: k must be >= 3");
  const PointBvh bvh(cloud.points);
  cloud.normals.clear();
  cloud.normals.reserve(cloud.size());
  std::vector<Vec3> nbrs;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto idx = bvh.knn(cloud.points[i], k);
    nbrs.clear();
    for (int j : idx) nbrs.push_back(cloud.points[j]);
    Vec3 n = plane_fit_normal(nbrs);
    if (n.dot(view_origin - cloud.points[i]) < 0.0) n = -n;
    cloud.normals.emplace_back(n);
  }
}

UnitVec3 smoothed_normal(const PointCloud& cloud, const PointBvh& index_bvh, int index,
                         double radius, double slab) {
  if (radius <= 0.0 || slab <= 0.0)
    throw std::invalid_argument("smoothed_normal: radius and slab must be > 0");
  cloud.require_normals();
  const Vec3& p = cloud.points[index];
  const Vec3& raw = cloud.normals[index].vec();

  const auto ball = index_bvh.radius_query(p, radius);
  std::vector<Vec3> survivors;
  survivors.reserve(ball.size());
  int neighbor_count = 0;
  for (int j : ball) {
    const double offset = std::abs((cloud.points[j] - p).dot(raw));
    if (offset <= slab) {
      survivors.push_back(cloud.points[j]);
      if (j != index) ++neighbor_count;
    }
  }
  if (neighbor_count < 3) throw std::runtime_error("insufficient support");

  Vec3 n = plane_fit_normal(survivors);
  if (n.dot(raw) < 0.0) n = -n;
  return UnitVec3(n);
}

UnitVec3 smoothed_normal(const PointCloud& cloud, int index, double radius, double slab) {
  return smoothed_normal(cloud, PointBvh(cloud.points), index, radius, slab);
}

int smooth_all_normals(PointCloud& cloud, double radius, double slab) {
  cloud.require_normals();
  const PointBvh bvh(cloud.points);
  std::vector<UnitVec3> smoothed = cloud.normals;
  int fallbacks = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    try {
      smoothed[i] = smoothed_normal(cloud, bvh, static_cast<int>(i), radius, slab);
    } catch (const std::runtime_error&) {
      ++fallbacks;
    }
  }
  cloud.normals = std::move(smoothed);
  return fallbacks;
}

std::vector<int> farthest_point_sampling(const PointCloud& cloud, int k, std::uint64_t seed) {
  const int n = static_cast<int>(cloud.size());
  if (k < 1 || k > n) throw std::invalid_argument("farthest_point_sampling: k out of range");
  Rng rng(seed);
  std::vector<int> chosen;
  chosen.reserve(k);
  chosen.push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n))));

  std::vector<double> min_d2(n, std::numeric_limits<double>::max());
  min_d2[chosen[0]] = -1.0;
  for (int round = 1; round < k; ++round) {
    const Vec3& last = cloud.points[chosen.back()];
    int best = -1;
    double best_d2 = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d2 = (cloud.points[i] - last).squaredNorm();
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    chosen.push_back(best);
    min_d2[best] = -1.0;  // never re-selected
  }
  return chosen;
}

std::vector<int> indices_in_aabb(const PointCloud& cloud, const Vec3& lo, const Vec3& hi) {
  std::vector<int> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y() &&
        p.z() >= lo.z() && p.z() <= hi.z())
      out.push_back(static_cast<int>(i));
  }
  return out;
}

PointCloud select_points(const PointCloud& cloud, const std::vector<int>& indices) {
  PointCloud out;
  out.points.reserve(indices.size());
  for (int i : indices) out.points.push_back(cloud.points[i]);
  if (cloud.has_normals()) {
    out.normals.reserve(indices.size());
    for (int i : indices) out.normals.push_back(cloud.normals[i]);
  }
  return out;
}

}  // namespace graspsynth
