#include "graspsynth/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "graspsynth/bvh.hpp"

namespace graspsynth {

void AngleBins::validate() const {
  if (count < 1) throw std::invalid_argument("angle bins: need at least one bin");
  if (!(max_angle > 0.0)) throw std::invalid_argument("angle bins: max angle must be positive");
}

double approach_angle(const GraspFrame& frame) {
  const double c = std::clamp(-frame.approach_axis().z(), -1.0, 1.0);
  return std::acos(c);
}

ProposalMetrics evaluate_proposals(const ProposalSet& proposals, const PointCloud& scene_cloud,
                                   const GripperGeometry& gripper) {
  if (proposals.empty()) throw std::invalid_argument("evaluate_proposals: need proposals");
  scene_cloud.require_normals();

  const PointBvh index(scene_cloud.points);
  ProposalMetrics metrics;
  metrics.evaluated = static_cast<int>(proposals.size());
  int clear = 0;
  double antipodal_sum = 0.0;
  for (const GraspCandidate& cand : proposals) {
    // nominal pose only: contacts and collision on the complete cloud
    const GraspScores s =
        robust_score(cand.frame, scene_cloud, index, scene_cloud, index, gripper, {});
    antipodal_sum += s.antipodal;
    if (s.collision_free) ++clear;
  }
  metrics.mean_antipodal = antipodal_sum / proposals.size();
  metrics.collision_free_fraction = static_cast<double>(clear) / proposals.size();
  return metrics;
}

RecallTable recall_by_angle(const std::vector<AnnotatedScene>& scenes, const AngleBins& bins,
                            const ScoreQuantizer& quantizer) {
  bins.validate();
  quantizer.validate();
  if (scenes.empty()) throw std::invalid_argument("recall_by_angle: no scenes");

  RecallTable table;
  for (int k = 0; k < bins.count; ++k) table.cutoffs.push_back(bins.upper(k));

  // per cutoff, per band: objects covered; denominators per band
  std::vector<std::array<std::int64_t, 3>> covered(bins.count, {0, 0, 0});
  std::vector<std::array<std::int64_t, 3>> first_in_bin(bins.count, {0, 0, 0});

  for (const AnnotatedScene& scene : scenes) {
    if (scene.object_count < 1 || scene.object_count > 15)
      throw std::invalid_argument("recall_by_angle: scene object count outside 1..15");
    if (scene.labels.size() != scene.view_cloud.size())
      throw std::invalid_argument("recall_by_angle: scenes need per-point labels");
    const int band = scene.object_count <= 5 ? 0 : scene.object_count <= 10 ? 1 : 2;
    ++table.band_scenes[band];
    table.band_objects[band] += scene.object_count;

    // best qualifying approach angle per object
    std::vector<double> best(scene.object_count, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < scene.annotations.size(); ++i) {
      const PointAnnotation& a = scene.annotations[i];
      if (!a.grasp) continue;
      const int obj = scene.labels[i];
      if (obj < 0) continue;  // table points carry no object
      if (obj >= scene.object_count)
        throw std::invalid_argument("recall_by_angle: label exceeds object count");
      if (!a.grasp->scores.collision_free) continue;
      if (quantizer.quantize(a.grasp->scores.robust) < 1) continue;
      best[obj] = std::min(best[obj], approach_angle(a.grasp->frame));
    }
    for (int obj = 0; obj < scene.object_count; ++obj) {
      for (int k = 0; k < bins.count; ++k) {
        if (best[obj] <= bins.upper(k)) {
          ++covered[k][band];
          if (k == 0 || best[obj] > bins.upper(k - 1)) ++first_in_bin[k][band];
        }
      }
    }
  }

  table.total_objects =
      table.band_objects[0] + table.band_objects[1] + table.band_objects[2];
  for (int k = 0; k < bins.count; ++k) {
    const std::int64_t all = covered[k][0] + covered[k][1] + covered[k][2];
    const std::int64_t fresh = first_in_bin[k][0] + first_in_bin[k][1] + first_in_bin[k][2];
    table.cumulative.push_back(static_cast<double>(all) / table.total_objects);
    table.per_bin.push_back(static_cast<double>(fresh) / table.total_objects);
    for (int band = 0; band < 3; ++band) {
      table.band_cumulative[band].push_back(
          table.band_objects[band] == 0
              ? 0.0
              : static_cast<double>(covered[k][band]) / table.band_objects[band]);
    }
  }
  return table;
}

}  // namespace graspsynth
