#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "graspsynth/contact.hpp"

namespace graspsynth {

struct SelectionConfig {
  int target_count = 10;    // stop after this many accepted grasps
  double epsilon = 0.03;    // minimum pairwise pose distance (mixed m + weighted rad)
  double tau = 1.0;         // sampling weight exponent, p ~ s^tau
  double rot_weight = 0.02; // meters per radian in the pose distance

  void validate() const;
};

// Translation distance plus weighted geodesic angle, the angle taken
// modulo the gripper's 180-degree flip about its closing axis.
double grasp_distance(const GraspFrame& h1, const GraspFrame& h2, double rot_weight = 0.02);

// Accepted grasps in descending score order with their sampling
// distribution. `excluded` records grasps already handed out by
// weighted_sample during a retry loop.
struct ExecutableSet {
  std::vector<GraspCandidate> grasps;
  std::vector<double> probabilities;  // p_k ~ s_k^tau, normalized
  double tau = 1.0;
  std::vector<bool> excluded;

  std::size_t size() const { return grasps.size(); }
};

// Non-maximum suppression: scan proposals by descending score (ties by
// input index), accept those that are collision-free and farther than
// epsilon from every already-accepted grasp, stop at target_count.
// `collides` is the executability veto (stand-in for plan feasibility).
ExecutableSet nms_select(const ProposalSet& proposals, const SelectionConfig& config,
                         const std::function<bool(const GraspFrame&)>& collides);

// Draw one not-yet-returned grasp with probability proportional to
// s^tau and mark it returned; deterministic per seed. Throws once every
// grasp has been handed out.
GraspCandidate weighted_sample(ExecutableSet& set, std::uint64_t seed);

}  // namespace graspsynth
