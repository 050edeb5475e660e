#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "graspsynth/annotation.hpp"
#include "graspsynth/contact.hpp"
#include "graspsynth/geometry.hpp"
#include "graspsynth/losses.hpp"

namespace graspsynth {

// Per-point feature vector: smoothed normal (3), height above the table
// (1), local covariance eigenvalues ascending (3), offset from the cloud
// centroid (3), and a pooled global descriptor shared by all points (6).
inline constexpr int kFeatureDim = 16;
using PointFeature = Eigen::VectorXd;

// Fully-connected network, tanh hidden layers, linear output head laid out
// as 6 rotation + 3 translation-offset + L score logits.
struct RegressorParams {
  std::vector<Eigen::MatrixXd> weights;  // weights[l] maps layer l to l+1
  std::vector<Eigen::VectorXd> biases;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  int levels() const { return output_dim() - 9; }
  void validate() const;

  static RegressorParams zeros(const std::vector<int>& sizes = {16, 64, 64, 13});
  static RegressorParams random_init(std::uint64_t seed,
                                     const std::vector<int>& sizes = {16, 64, 64, 13});
};

// Raw network output for one point; the grasp origin is the point's own
// position plus `offset`.
struct RegressorOutput {
  SixDRotation rotation;
  Vec3 offset{0.0, 0.0, 0.0};
  Eigen::VectorXd logits;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 100;
  int decay_every = 20;  // halve the learning rate this many epochs
  int batch_size = 0;    // points per step; 0 = one step per record
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int levels = 4;
  LossWeights loss_weights{};
  double divergence_limit = 1e6;

  void validate() const;
};

struct LossSample {
  int step = 0;
  double learning_rate = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  RegressorParams params;
  std::vector<LossSample> curve;  // one sample per optimization step
};

// Deterministic hand-crafted features. Requires smoothed normals and at
// least 4 points (the local covariance needs a neighborhood).
std::vector<PointFeature> extract_features(const PointCloud& cloud, double table_height);

// Network pass over a feature batch.
std::vector<RegressorOutput> forward(const RegressorParams& params,
                                     const std::vector<PointFeature>& features);

// Gradient descent with momentum on the pose-plus-score loss, class
// weights from the dataset's level histogram, learning rate halved every
// decay_every epochs. Aborts when the loss exceeds divergence_limit.
TrainResult train(const std::vector<DatasetRecord>& dataset, const TrainConfig& config);

// One proposal per point: predicted pose and the expected score level
// under the softmax of the logits, normalized to [0, 1].
ProposalSet predict_scene(const RegressorParams& params, const PointCloud& cloud,
                          double table_height);

// Little-endian float32 parameter blob with a layer-shape header.
void save_params(const RegressorParams& params, const std::filesystem::path& path);
RegressorParams load_params(const std::filesystem::path& path);

// CSV rows: step, learning_rate, loss.
void write_loss_curve(const std::vector<LossSample>& curve, const std::filesystem::path& path);

}  // namespace graspsynth
