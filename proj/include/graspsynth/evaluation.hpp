#pragma once

#include <array>
#include <vector>

#include "graspsynth/annotation.hpp"
#include "graspsynth/contact.hpp"
#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Equal-width cumulative angle cutoffs over (0, max_angle], measured
// between the approach axis and straight down.
struct AngleBins {
  int count = 6;
  double max_angle = 1.5707963267948966;  // pi/2

  void validate() const;
  double upper(int k) const { return max_angle * (k + 1) / count; }
};

struct ProposalMetrics {
  double mean_antipodal = 0.0;          // re-realized on the complete cloud
  double collision_free_fraction = 0.0; // against the complete cloud
  int evaluated = 0;
};

// Density bands by object count: simple 1-5, semi-dense 6-10, dense 11-15.
struct RecallTable {
  std::vector<double> cutoffs;     // upper bin edges, radians
  std::vector<double> per_bin;     // objects first graspable inside each bin
  std::vector<double> cumulative;  // objects graspable at or below each cutoff
  std::array<std::vector<double>, 3> band_cumulative;
  std::array<int, 3> band_objects{0, 0, 0};
  std::array<int, 3> band_scenes{0, 0, 0};
  int total_objects = 0;
};

// Angle between the approach axis and straight down (world -z), radians.
double approach_angle(const GraspFrame& frame);

// Scores the given (already truncated, e.g. top-10) proposals against the
// complete scene: nominal antipodal score with contacts re-realized on the
// full cloud, and the collision veto.
ProposalMetrics evaluate_proposals(const ProposalSet& proposals, const PointCloud& scene_cloud,
                                   const GripperGeometry& gripper);

// Fraction of objects with at least one annotation-grade, collision-free
// grasp within each approach-angle cutoff. Objects with no visible points
// count in the denominators; overall rows weight bands by object count.
// Scenes must carry per-point labels and their object counts.
RecallTable recall_by_angle(const std::vector<AnnotatedScene>& scenes, const AngleBins& bins = {},
                            const ScoreQuantizer& quantizer = {});

}  // namespace graspsynth
