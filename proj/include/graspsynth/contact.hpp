#pragma once

#include <string>
#include <vector>

#include "graspsynth/bvh.hpp"
#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Parallel-jaw gripper dimensions, meters. The closing region is the box
// between the pads (opening x thickness x length); the body adds the two
// finger boxes and the palm block behind them.
struct GripperGeometry {
  double max_opening = 0.080;
  double finger_length = 0.060;
  double finger_thickness = 0.015;
  double palm_depth = 0.020;
  double pad_deformation = 0.003;
  double smoothing_radius = 0.023;

  void validate() const;

  // Key-value text config (`key value` per line, '#' comments, meters).
  // Missing keys keep their defaults; unknown keys are an error.
  static GripperGeometry load(const std::string& path);
  void save(const std::string& path) const;
};

// Gripper pose: origin midway between the fingertips, x along the closing
// line, z the approach direction.
struct GraspFrame {
  RigidTransform pose;

  Vec3 origin() const { return pose.translation; }
  Vec3 closing_axis() const { return pose.rotation.matrix().col(0); }
  Vec3 approach_axis() const { return pose.rotation.matrix().col(2); }
};

struct ContactPair {
  int i = 0;
  int j = 0;
  double antipodal = 0.0;
};

struct GraspScores {
  double antipodal = 0.0;    // s_a in [0,1], nominal pose
  double occupancy = 0.0;    // s_o in [0,6], nominal pose
  bool collision_free = false;
  double robust = 0.0;       // min over perturbed poses of s_a*s_o*s_c
};

struct GraspCandidate {
  GraspFrame frame;
  GraspScores scores;
};

// Scored grasp list, as produced by exhaustive synthesis or a regressor.
using ProposalSet = std::vector<GraspCandidate>;

// cos(a1)*cos(a2) with a_i the angle between the outward normal at each
// contact and the closing line; 0 if either contact faces the wrong way.
double antipodal_score(const Vec3& p_i, const UnitVec3& n_i, const Vec3& p_j,
                       const UnitVec3& n_j);

// All point pairs (i < j) within max_opening whose antipodal score meets
// the threshold and whose closing line is clear of the finger sweep.
std::vector<ContactPair> find_contact_pairs(const PointCloud& cloud,
                                            const GripperGeometry& gripper,
                                            double threshold = 0.7);
std::vector<ContactPair> find_contact_pairs(const PointCloud& cloud, const PointBvh& index,
                                            const GripperGeometry& gripper,
                                            double threshold = 0.7);

// Frames for one contact pair: x along p_i -> p_j, approach directions at
// angles 2*pi*k/approach_count around the closing line from a fixed
// reference, origin at the pair midpoint.
std::vector<GraspFrame> frames_from_pair(const ContactPair& pair, const PointCloud& cloud,
                                         const GripperGeometry& gripper, int approach_count);

// Indices of cloud points inside the closing region (ascending).
std::vector<int> closing_region_points(const PointCloud& cloud, const GraspFrame& frame,
                                       const GripperGeometry& gripper);
std::vector<int> closing_region_points(const PointCloud& cloud, const PointBvh& index,
                                       const GraspFrame& frame, const GripperGeometry& gripper);

// min(ln(count), 6); 0 for empty or single-point regions.
double occupancy_score(int count);

// True iff any scene point lies inside the finger or palm boxes.
bool collision_check(const PointCloud& scene_cloud, const GraspFrame& frame,
                     const GripperGeometry& gripper);
bool collision_check(const PointCloud& scene_cloud, const PointBvh& index,
                     const GraspFrame& frame, const GripperGeometry& gripper);

// Zero twist, +/-translation along each gripper axis, +/-rotation about
// each gripper axis through the grasp origin: 13 poses.
std::vector<Twist> default_perturbations(const GraspFrame& frame, double translation = 0.004,
                                         double angle = 0.1);

// Scores under the perturbation set: each twist xi yields the pose
// exp(xi)*h, scored by re-realized contacts (view cloud) and collision
// against the complete scene cloud; robust = min of the per-pose products.
// The reported antipodal/occupancy/collision terms are the nominal pose's.
GraspScores robust_score(const GraspFrame& frame, const PointCloud& view_cloud,
                         const PointCloud& scene_cloud, const GripperGeometry& gripper,
                         const std::vector<Twist>& perturbations);
GraspScores robust_score(const GraspFrame& frame, const PointCloud& view_cloud,
                         const PointBvh& view_index, const PointCloud& scene_cloud,
                         const PointBvh& scene_index, const GripperGeometry& gripper,
                         const std::vector<Twist>& perturbations);

}  // namespace graspsynth
