#include "graspsynth/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "graspsynth/losses.hpp"
#include "graspsynth/rng.hpp"

namespace graspsynth {

void SelectionConfig::validate() const {
  if (target_count < 1) throw std::invalid_argument("selection: target count must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("selection: epsilon must be nonnegative");
  if (!(tau > 0.0)) throw std::invalid_argument("selection: tau must be positive");
  if (!(rot_weight >= 0.0))
    throw std::invalid_argument("selection: rotation weight must be nonnegative");
}

double grasp_distance(const GraspFrame& h1, const GraspFrame& h2, double rot_weight) {
  const double translation = (h1.pose.translation - h2.pose.translation).norm();
  const RotationMatrix& r1 = h1.pose.rotation;
  const RotationMatrix flipped = RotationMatrix::from_matrix_unchecked(x_flip(h2.pose.rotation.matrix()));
  const double angle = std::min(r1.angle_to(h2.pose.rotation), r1.angle_to(flipped));
  return translation + rot_weight * angle;
}

ExecutableSet nms_select(const ProposalSet& proposals, const SelectionConfig& config,
                         const std::function<bool(const GraspFrame&)>& collides) {
  config.validate();
  for (const GraspCandidate& c : proposals) {
    if (!std::isfinite(c.scores.robust))
      throw std::invalid_argument("nms_select: non-finite proposal score");
  }

  std::vector<int> order(proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return proposals[a].scores.robust > proposals[b].scores.robust;
  });

  ExecutableSet set;
  set.tau = config.tau;
  for (int idx : order) {
    if (static_cast<int>(set.grasps.size()) >= config.target_count) break;
    const GraspCandidate& cand = proposals[idx];
    if (collides(cand.frame)) continue;
    bool clear = true;
    for (const GraspCandidate& kept : set.grasps) {
      if (grasp_distance(cand.frame, kept.frame, config.rot_weight) <= config.epsilon) {
        clear = false;
        break;
      }
    }
    if (clear) set.grasps.push_back(cand);
  }
  if (set.grasps.empty()) throw std::runtime_error("no executable grasp");

  set.probabilities.resize(set.grasps.size());
  set.excluded.assign(set.grasps.size(), false);
  double total = 0.0;
  for (std::size_t k = 0; k < set.grasps.size(); ++k) {
    set.probabilities[k] = std::pow(set.grasps[k].scores.robust, config.tau);
    total += set.probabilities[k];
  }
  if (total > 0.0) {
    for (double& p : set.probabilities) p /= total;
  } else {
    // all-zero scores: fall back to a uniform draw
    const double uniform = 1.0 / static_cast<double>(set.grasps.size());
    for (double& p : set.probabilities) p = uniform;
  }
  return set;
}

GraspCandidate weighted_sample(ExecutableSet& set, std::uint64_t seed) {
  if (set.grasps.empty()) throw std::invalid_argument("weighted_sample: empty set");
  if (set.excluded.size() != set.grasps.size())
    throw std::invalid_argument("weighted_sample: exclusion mask size mismatch");

  std::vector<int> remaining;
  for (std::size_t k = 0; k < set.grasps.size(); ++k) {
    if (!set.excluded[k]) remaining.push_back(static_cast<int>(k));
  }
  if (remaining.empty())
    throw std::runtime_error("weighted_sample: executable set exhausted by retries");

  std::vector<double> weights;
  weights.reserve(remaining.size());
  double total = 0.0;
  for (int k : remaining) {
    weights.push_back(std::pow(set.grasps[k].scores.robust, set.tau));
    total += weights.back();
  }

  Rng rng(seed);
  int pick = remaining.back();
  if (total > 0.0) {
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      acc += weights[i];
      if (target < acc) {
        pick = remaining[i];
        break;
      }
    }
  } else {
    pick = remaining[rng.uniform_index(remaining.size())];
  }
  set.excluded[pick] = true;
  return set.grasps[pick];
}

}  // namespace graspsynth
