#pragma once

#include <Eigen/Dense>
#include <vector>

#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Continuous 6D rotation representation: two free 3-vectors mapped onto
// SO(3) by normalization + Gram-Schmidt.
struct SixDRotation {
  Vec3 a1{1.0, 0.0, 0.0};
  Vec3 a2{0.0, 1.0, 0.0};
};

// Column-flip for the gripper's 180-degree symmetry about its closing
// axis: R * diag(1, -1, -1). Exact sign flips, no matmul.
Mat3 x_flip(const Mat3& r);

// b1 = N(a1); b2 = N(a2 - <a2,b1> b1); b3 = b1 x b2. Throws
// "degenerate representation" when a1 vanishes or a1 ‖ a2.
RotationMatrix sixd_to_rotation(const SixDRotation& a);

// Canonical right-inverse: first two columns of R.
SixDRotation rotation_to_sixd(const RotationMatrix& r);

// min over the symmetry branch of the squared Frobenius distance
// ||f(a) - R_gt^(i)||^2. Range [0, 8].
double rotation_loss(const SixDRotation& a_pred, const RotationMatrix& r_gt);

// Loss plus analytic gradient with respect to (a1, a2). The gradient of
// the min is the gradient of the active branch (ties take the unflipped
// branch).
double rotation_loss_grad(const SixDRotation& a_pred, const RotationMatrix& r_gt,
                          Vec3& grad_a1, Vec3& grad_a2);

// Squared Euclidean distance.
double translation_loss(const Vec3& t_pred, const Vec3& t_gt);
double translation_loss_grad(const Vec3& t_pred, const Vec3& t_gt, Vec3& grad_t);

struct LossWeights {
  double rotation = 5.0;
  double translation = 20.0;
  double score = 1.0;
};

// Per-level positive weights for the score classification loss.
struct ClassWeights {
  std::vector<double> w;

  explicit ClassWeights(int levels = 4) : w(levels, 1.0) {}
  explicit ClassWeights(std::vector<double> weights);

  // Inverse level frequency over the given counts, renormalized to mean 1.
  // Levels absent from the data fall back to the mean weight.
  static ClassWeights inverse_frequency(const std::vector<std::int64_t>& level_counts);

  int levels() const { return static_cast<int>(w.size()); }
};

// Weighted cross entropy, max-subtraction stabilized:
// w[level] * (logsumexp(logits) - logits[level]).
double score_class_loss(const Eigen::VectorXd& logits, int level, const ClassWeights& w);
double score_class_loss_grad(const Eigen::VectorXd& logits, int level, const ClassWeights& w,
                             Eigen::VectorXd& grad_logits);

struct PointPrediction {
  SixDRotation rotation;
  Vec3 translation{0.0, 0.0, 0.0};
  Eigen::VectorXd logits;
};

struct PointTarget {
  bool viable = false;
  RotationMatrix rotation_gt;       // meaningful only when viable
  Vec3 translation_gt{0.0, 0.0, 0.0};
  int level = 0;
};

struct PointGradient {
  Vec3 a1{0.0, 0.0, 0.0};
  Vec3 a2{0.0, 0.0, 0.0};
  Vec3 translation{0.0, 0.0, 0.0};
  Eigen::VectorXd logits;
};

struct TotalLossResult {
  double value = 0.0;
  std::vector<PointGradient> gradients;  // aligned 1:1 with predictions
};

// Pose terms over viable points plus the classification term over all
// points. Plain sums by default; mean_reduce divides the loss and every
// gradient by the batch point count.
TotalLossResult total_loss(const std::vector<PointPrediction>& predictions,
                           const std::vector<PointTarget>& targets,
                           const LossWeights& weights, const ClassWeights& class_weights,
                           bool mean_reduce = false);

}  // namespace graspsynth
