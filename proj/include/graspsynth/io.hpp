#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "graspsynth/contact.hpp"
#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Binary little-endian PLY, x/y/z float32 plus optional nx/ny/nz float32.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

// OBJ with vertices and triangular faces only. Polygonal faces are an error.
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Per-point int32 labels (little-endian, u32 count header).
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::filesystem::path& path);

// Pose <-> the 12-float layout used by manifests and grasp records:
// row-major rotation followed by translation.
std::array<double, 12> pose_to_floats(const RigidTransform& pose);
RigidTransform pose_from_floats(const std::array<double, 12>& f);

// Scored grasps as JSON lines, one object per grasp: the 12-float pose plus
// the four score fields. Values round-trip exactly.
void write_grasps_jsonl(const std::filesystem::path& path, const ProposalSet& grasps);
ProposalSet read_grasps_jsonl(const std::filesystem::path& path);

// Wireframe gripper outlines for visual inspection: ASCII PLY with an edge
// element, six vertices and four segments per grasp.
void write_grasp_markers_ply(const std::filesystem::path& path, const ProposalSet& grasps,
                             const GripperGeometry& gripper);

}  // namespace graspsynth
