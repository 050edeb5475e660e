#include "graspsynth/losses.hpp"

#include <cmath>

namespace graspsynth {

namespace {
constexpr double kMinNorm = 1e-9;
constexpr double kMinAngle = 1e-6;

// Squared Frobenius distance between [b1 b2 b3] and the columns of r.
double frob2(const Vec3& b1, const Vec3& b2, const Vec3& b3, const Mat3& r) {
  return (b1 - r.col(0)).squaredNorm() + (b2 - r.col(1)).squaredNorm() +
         (b3 - r.col(2)).squaredNorm();
}

struct GramSchmidt {
  Vec3 b1, b2, b3;
  Vec3 u;          // un-normalized b2
  double a1_norm;
  double u_norm;
};

GramSchmidt map_sixd(const SixDRotation& a) {
  GramSchmidt g;
  g.a1_norm = a.a1.norm();
  const double a2_norm = a.a2.norm();
  if (g.a1_norm < kMinNorm || a2_norm < kMinNorm)
    throw std::invalid_argument("degenerate representation");
  g.b1 = a.a1 / g.a1_norm;
  // parallel check: sin of the angle between a1 and a2
  if (a.a1.cross(a.a2).norm() / (g.a1_norm * a2_norm) < kMinAngle)
    throw std::invalid_argument("degenerate representation");
  g.u = a.a2 - a.a2.dot(g.b1) * g.b1;
  g.u_norm = g.u.norm();
  g.b2 = g.u / g.u_norm;
  g.b3 = g.b1.cross(g.b2);
  return g;
}
}  // namespace

Mat3 x_flip(const Mat3& r) {
  Mat3 f = r;
  f.col(1) = -f.col(1);
  f.col(2) = -f.col(2);
  return f;
}

RotationMatrix sixd_to_rotation(const SixDRotation& a) {
  const GramSchmidt g = map_sixd(a);
  Mat3 r;
  r.col(0) = g.b1;
  r.col(1) = g.b2;
  r.col(2) = g.b3;
  return RotationMatrix::from_matrix_unchecked(r);
}

SixDRotation rotation_to_sixd(const RotationMatrix& r) {
  return {r.matrix().col(0), r.matrix().col(1)};
}

double rotation_loss(const SixDRotation& a_pred, const RotationMatrix& r_gt) {
  const GramSchmidt g = map_sixd(a_pred);
  const Mat3& r = r_gt.matrix();
  return std::min(frob2(g.b1, g.b2, g.b3, r), frob2(g.b1, g.b2, g.b3, x_flip(r)));
}

double rotation_loss_grad(const SixDRotation& a_pred, const RotationMatrix& r_gt,
                          Vec3& grad_a1, Vec3& grad_a2) {
  const GramSchmidt g = map_sixd(a_pred);
  const Mat3& r0 = r_gt.matrix();
  const Mat3 r1 = x_flip(r0);
  const double l0 = frob2(g.b1, g.b2, g.b3, r0);
  const double l1 = frob2(g.b1, g.b2, g.b3, r1);
  const Mat3& r = (l0 <= l1) ? r0 : r1;

  // Backprop through b3 = b1 x b2, b2 = N(u), u = a2 - <a2,b1> b1,
  // b1 = N(a1).
  const Vec3 g1 = 2.0 * (g.b1 - r.col(0));
  const Vec3 g2 = 2.0 * (g.b2 - r.col(1));
  const Vec3 g3 = 2.0 * (g.b3 - r.col(2));

  Vec3 d_b2 = g2 + g3.cross(g.b1);
  Vec3 d_b1 = g1 + g.b2.cross(g3);

  const Vec3 d_u = (d_b2 - g.b2 * g.b2.dot(d_b2)) / g.u_norm;
  grad_a2 = d_u - g.b1 * g.b1.dot(d_u);
  const double a2_dot_b1 = a_pred.a2.dot(g.b1);
  d_b1 += -(a_pred.a2 * g.b1.dot(d_u) + a2_dot_b1 * d_u);
  grad_a1 = (d_b1 - g.b1 * g.b1.dot(d_b1)) / g.a1_norm;

  return std::min(l0, l1);
}

double translation_loss(const Vec3& t_pred, const Vec3& t_gt) {
  return (t_pred - t_gt).squaredNorm();
}

double translation_loss_grad(const Vec3& t_pred, const Vec3& t_gt, Vec3& grad_t) {
  grad_t = 2.0 * (t_pred - t_gt);
  return (t_pred - t_gt).squaredNorm();
}

ClassWeights::ClassWeights(std::vector<double> weights) : w(std::move(weights)) {
  for (double x : w) {
    if (!(x > 0.0)) throw std::invalid_argument("class weights must be positive");
  }
}

ClassWeights ClassWeights::inverse_frequency(const std::vector<std::int64_t>& level_counts) {
  const int levels = static_cast<int>(level_counts.size());
  std::vector<double> raw(levels, 0.0);
  double sum = 0.0;
  int present = 0;
  for (int l = 0; l < levels; ++l) {
    if (level_counts[l] > 0) {
      raw[l] = 1.0 / static_cast<double>(level_counts[l]);
      sum += raw[l];
      ++present;
    }
  }
  if (present == 0) return ClassWeights(levels);
  const double mean = sum / present;
  std::vector<double> w(levels);
  for (int l = 0; l < levels; ++l) w[l] = (raw[l] > 0.0 ? raw[l] : mean) / mean;
  return ClassWeights(std::move(w));
}

double score_class_loss(const Eigen::VectorXd& logits, int level, const ClassWeights& w) {
  if (level < 0 || level >= logits.size())
    throw std::invalid_argument("score_class_loss: level out of range");
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return w.w[level] * (lse - logits[level]);
}

double score_class_loss_grad(const Eigen::VectorXd& logits, int level, const ClassWeights& w,
                             Eigen::VectorXd& grad_logits) {
  if (level < 0 || level >= logits.size())
    throw std::invalid_argument("score_class_loss: level out of range");
  const double m = logits.maxCoeff();
  const Eigen::ArrayXd shifted = (logits.array() - m).exp();
  const double z = shifted.sum();
  const double lse = m + std::log(z);
  grad_logits = (shifted / z).matrix() * w.w[level];
  grad_logits[level] -= w.w[level];
  return w.w[level] * (lse - logits[level]);
}

TotalLossResult total_loss(const std::vector<PointPrediction>& predictions,
                           const std::vector<PointTarget>& targets,
                           const LossWeights& weights, const ClassWeights& class_weights,
                           bool mean_reduce) {
  if (predictions.size() != targets.size())
    throw std::invalid_argument("total_loss: prediction/target size mismatch");
  TotalLossResult result;
  result.gradients.resize(predictions.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const PointPrediction& pred = predictions[i];
    const PointTarget& tgt = targets[i];
    PointGradient& grad = result.gradients[i];
    if (tgt.viable) {
      Vec3 ga1, ga2, gt;
      loss += weights.rotation * rotation_loss_grad(pred.rotation, tgt.rotation_gt, ga1, ga2);
      loss += weights.translation * translation_loss_grad(pred.translation, tgt.translation_gt, gt);
      grad.a1 = weights.rotation * ga1;
      grad.a2 = weights.rotation * ga2;
      grad.translation = weights.translation * gt;
    }
    Eigen::VectorXd gl;
    loss += weights.score * score_class_loss_grad(pred.logits, tgt.level, class_weights, gl);
    grad.logits = weights.score * gl;
  }
  if (mean_reduce && !predictions.empty()) {
    const double inv = 1.0 / static_cast<double>(predictions.size());
    loss *= inv;
    for (PointGradient& g : result.gradients) {
      g.a1 *= inv;
      g.a2 *= inv;
      g.translation *= inv;
      g.logits *= inv;
    }
  }
  result.value = loss;
  return result;
}

}  // namespace graspsynth
