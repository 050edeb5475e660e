#pragma once

#include "graspsynth/bvh.hpp"
#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Voxel grid filter. One output point per occupied voxel (member centroid),
// ordered by first occurrence in the input. Normals are dropped; the
// pipeline re-estimates them on the filtered cloud.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Same filter, also reporting the first input index that fell into each
// output voxel (used to carry per-point labels through the filter).
PointCloud voxel_downsample_map(const PointCloud& cloud, double leaf,
                                std::vector<int>* first_member);

// Raw normals from a covariance plane fit over the k nearest neighbors,
// oriented toward view_origin.
void estimate_raw_normals(PointCloud& cloud, int k, const Vec3& view_origin);

// Disc-filtered normal smoothing: ball neighbors whose offset along the raw
// normal at `index` exceeds `slab` are discarded, the rest are refit.
// Sign agrees with the raw normal. Throws on fewer than 3 surviving
// neighbors ("insufficient support").
UnitVec3 smoothed_normal(const PointCloud& cloud, const PointBvh& index_bvh, int index,
                         double radius, double slab);
UnitVec3 smoothed_normal(const PointCloud& cloud, int index, double radius, double slab);

// Smooth every normal in place; points without sufficient support keep
// their raw normal. Returns the number of points that fell back.
int smooth_all_normals(PointCloud& cloud, double radius, double slab);

// Greedy farthest point sampling. First pick is seeded-uniform, each later
// pick maximizes the minimum distance to the chosen set (ties -> lowest
// index).
std::vector<int> farthest_point_sampling(const PointCloud& cloud, int k, std::uint64_t seed);

// Indices of points inside the closed box [lo, hi].
std::vector<int> indices_in_aabb(const PointCloud& cloud, const Vec3& lo, const Vec3& hi);

// Subset of a cloud (keeps normals when present).
PointCloud select_points(const PointCloud& cloud, const std::vector<int>& indices);

}  // namespace graspsynth
