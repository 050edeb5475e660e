#include "graspsynth/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"
#include "graspsynth/bvh.hpp"
#include "graspsynth/rng.hpp"

namespace graspsynth {

namespace {

using binio::put_f32;
using binio::put_u32;
using binio::Reader;

constexpr char kParamsMagic[4] = {'G', 'S', 'N', 'N'};
constexpr std::uint32_t kParamsVersion = 1;

// Seed of the global-descriptor lift; fixed so features are a pure
// function of the cloud.
constexpr std::uint64_t kLiftSeed = 0x8f3a1c5d2e4b6a79ULL;
constexpr int kLiftDim = 6;
constexpr int kNeighborhood = 16;
constexpr double kGradClipNorm = 10.0;

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string("regressor: non-finite ") + what);
}

// One step of the batched pass: activations[0] is the input block, each
// later entry the tanh output of a hidden layer, `output` the linear head.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  Eigen::MatrixXd output;
};

ForwardCache forward_batch(const RegressorParams& params, const Eigen::MatrixXd& inputs) {
  ForwardCache cache;
  cache.activations.push_back(inputs);
  const std::size_t nl = params.weights.size();
  for (std::size_t l = 0; l + 1 < nl; ++l) {
    const Eigen::MatrixXd z =
        (params.weights[l] * cache.activations.back()).colwise() + params.biases[l];
    cache.activations.push_back(z.array().tanh().matrix());
  }
  cache.output =
      (params.weights[nl - 1] * cache.activations.back()).colwise() + params.biases[nl - 1];
  return cache;
}

RegressorOutput split_output(const Eigen::VectorXd& y) {
  RegressorOutput out;
  out.rotation.a1 = y.segment<3>(0);
  out.rotation.a2 = y.segment<3>(3);
  out.offset = y.segment<3>(6);
  out.logits = y.tail(y.size() - 9);
  return out;
}

}  // namespace

void RegressorParams::validate() const {
  if (weights.empty() || weights.size() != biases.size())
    throw std::invalid_argument("regressor: weight/bias layer mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() == 0 || weights[l].cols() == 0)
      throw std::invalid_argument("regressor: empty layer");
    if (biases[l].size() != weights[l].rows())
      throw std::invalid_argument("regressor: bias shape mismatch");
    if (l + 1 < weights.size() && weights[l + 1].cols() != weights[l].rows())
      throw std::invalid_argument("regressor: layer shapes do not chain");
    check_finite(weights[l], "weight");
    check_finite(biases[l], "bias");
  }
}

RegressorParams RegressorParams::zeros(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("regressor: need at least two layer sizes");
  RegressorParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] < 1 || sizes[l + 1] < 1)
      throw std::invalid_argument("regressor: layer sizes must be positive");
    p.weights.emplace_back(Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]));
    p.biases.emplace_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return p;
}

RegressorParams RegressorParams::random_init(std::uint64_t seed, const std::vector<int>& sizes) {
  RegressorParams p = zeros(sizes);
  Rng rng(seed);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.weights[l].cols()));
    for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c)
        p.weights[l](r, c) = scale * rng.normal();
  }
  // Start the rotation head at the identity encoding. The decode map
  // normalizes its inputs, so gradients scale like 1/|a1|; heads that
  // start near zero blow up on the first viable-heavy batch.
  if (p.biases.back().size() >= 6) {
    p.biases.back()(0) = 1.0;
    p.biases.back()(4) = 1.0;
  }
  return p;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("train: learning rate must be nonnegative");
  if (epochs < 1) throw std::invalid_argument("train: need at least one epoch");
  if (decay_every < 1) throw std::invalid_argument("train: decay interval must be positive");
  if (batch_size < 0) throw std::invalid_argument("train: negative batch size");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("train: momentum must be in [0, 1)");
  if (levels < 2) throw std::invalid_argument("train: need at least two score levels");
  if (!(divergence_limit > 0.0)) throw std::invalid_argument("train: bad divergence limit");
}

std::vector<PointFeature> extract_features(const PointCloud& cloud, double table_height) {
  cloud.require_normals();
  const int n = static_cast<int>(cloud.size());
  if (n < 4) throw std::invalid_argument("extract_features: need at least 4 points");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : cloud.points) centroid += p;
  centroid /= n;

  // seeded linear lift, max-pooled over the cloud
  Rng lift_rng(kLiftSeed);
  Eigen::Matrix<double, kLiftDim, 3> lift;
  for (int r = 0; r < kLiftDim; ++r)
    for (int c = 0; c < 3; ++c) lift(r, c) = lift_rng.normal();
  Eigen::Matrix<double, kLiftDim, 1> pooled =
      Eigen::Matrix<double, kLiftDim, 1>::Constant(-std::numeric_limits<double>::infinity());
  for (const Vec3& p : cloud.points) pooled = pooled.cwiseMax(lift * p);

  const PointBvh index(cloud.points);
  const int k = std::min(kNeighborhood, n);
  std::vector<PointFeature> features;
  features.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<int> nb = index.knn(cloud.points[i], k);
    Vec3 mean = Vec3::Zero();
    for (int j : nb) mean += cloud.points[j];
    mean /= static_cast<double>(nb.size());
    Mat3 cov = Mat3::Zero();
    for (int j : nb) {
      const Vec3 d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nb.size());
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);

    PointFeature f(kFeatureDim);
    f.segment<3>(0) = cloud.normals[i].vec();
    f(3) = cloud.points[i].z() - table_height;
    f.segment<3>(4) = eig.eigenvalues();  // ascending
    f.segment<3>(7) = cloud.points[i] - centroid;
    f.segment<kLiftDim>(10) = pooled;
    features.push_back(std::move(f));
  }
  return features;
}

std::vector<RegressorOutput> forward(const RegressorParams& params,
                                     const std::vector<PointFeature>& features) {
  params.validate();
  if (params.output_dim() < 11)
    throw std::invalid_argument("regressor: output head needs 6+3 pose values and >= 2 logits");
  std::vector<RegressorOutput> outputs;
  outputs.reserve(features.size());
  if (features.empty()) return outputs;

  Eigen::MatrixXd block(params.input_dim(), features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != params.input_dim())
      throw std::invalid_argument("regressor: feature dimension mismatch");
    block.col(i) = features[i];
  }
  const ForwardCache cache = forward_batch(params, block);
  for (std::size_t i = 0; i < features.size(); ++i) {
    outputs.push_back(split_output(cache.output.col(i)));
  }
  return outputs;
}

namespace {

struct RecordBatchSource {
  std::vector<Vec3> positions;
  Eigen::MatrixXd features;  // one column per point
  std::vector<PointTarget> targets;
};

RecordBatchSource prepare_record(const DatasetRecord& record, int levels) {
  if (record.points.empty()) throw std::invalid_argument("train: empty dataset record");
  PointCloud cloud;
  cloud.points.reserve(record.points.size());
  cloud.normals.reserve(record.points.size());
  for (const DatasetEntry& e : record.points) {
    cloud.points.emplace_back(e.position[0], e.position[1], e.position[2]);
    const Vec3 nrm(e.normal[0], e.normal[1], e.normal[2]);
    if (nrm.norm() < 1e-12)
      throw std::invalid_argument("train: dataset records need stored normals");
    cloud.normals.emplace_back(nrm);
  }

  RecordBatchSource src;
  src.positions = cloud.points;
  const std::vector<PointFeature> feats =
      extract_features(cloud, static_cast<double>(record.table_height));
  src.features.resize(kFeatureDim, feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) src.features.col(i) = feats[i];

  src.targets.reserve(record.points.size());
  for (const DatasetEntry& e : record.points) {
    if (e.score_level >= levels)
      throw std::invalid_argument("train: dataset level exceeds configured level count");
    PointTarget t;
    t.level = e.score_level;
    t.viable = e.viable != 0;
    if (t.viable) {
      // re-orthonormalize the float32-rounded stored rotation
      const Vec3 col0(e.pose[0], e.pose[3], e.pose[6]);
      const Vec3 col1(e.pose[1], e.pose[4], e.pose[7]);
      t.rotation_gt = sixd_to_rotation({col0, col1});
      t.translation_gt = Vec3(e.pose[9], e.pose[10], e.pose[11]);
    }
    src.targets.push_back(std::move(t));
  }
  return src;
}

}  // namespace

TrainResult train(const std::vector<DatasetRecord>& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  std::vector<RecordBatchSource> sources;
  sources.reserve(dataset.size());
  std::vector<std::int64_t> level_counts(config.levels, 0);
  for (const DatasetRecord& record : dataset) {
    sources.push_back(prepare_record(record, config.levels));
    for (const DatasetEntry& e : record.points) ++level_counts[e.score_level];
  }
  const ClassWeights class_weights = ClassWeights::inverse_frequency(level_counts);

  TrainResult result;
  result.params = RegressorParams::random_init(config.seed, {kFeatureDim, 64, 64, 9 + config.levels});
  RegressorParams& params = result.params;

  std::vector<Eigen::MatrixXd> vel_w;
  std::vector<Eigen::VectorXd> vel_b;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    vel_w.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    vel_b.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }

  const int out_dim = params.output_dim();
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = std::ldexp(config.learning_rate, -(epoch / config.decay_every));
    for (const RecordBatchSource& src : sources) {
      const int n = static_cast<int>(src.targets.size());
      const int bs = config.batch_size == 0 ? n : std::min(config.batch_size, n);
      for (int start = 0; start < n; start += bs) {
        const int count = std::min(bs, n - start);
        const Eigen::MatrixXd inputs = src.features.middleCols(start, count);
        const ForwardCache cache = forward_batch(params, inputs);

        std::vector<PointPrediction> preds(count);
        std::vector<PointTarget> targets(src.targets.begin() + start,
                                         src.targets.begin() + start + count);
        for (int i = 0; i < count; ++i) {
          const RegressorOutput out = split_output(cache.output.col(i));
          preds[i].rotation = out.rotation;
          preds[i].translation = src.positions[start + i] + out.offset;
          preds[i].logits = out.logits;
        }
        const TotalLossResult loss =
            total_loss(preds, targets, config.loss_weights, class_weights, true);
        if (!(loss.value <= config.divergence_limit)) {
          std::ostringstream msg;
          msg << "train: loss diverged at step " << step << " (loss " << loss.value << ")";
          throw std::runtime_error(msg.str());
        }

        Eigen::MatrixXd grad_out(out_dim, count);
        for (int i = 0; i < count; ++i) {
          grad_out.col(i).segment<3>(0) = loss.gradients[i].a1;
          grad_out.col(i).segment<3>(3) = loss.gradients[i].a2;
          grad_out.col(i).segment<3>(6) = loss.gradients[i].translation;
          grad_out.col(i).tail(out_dim - 9) = loss.gradients[i].logits;
        }

        // backward pass
        Eigen::MatrixXd delta = grad_out;
        std::vector<Eigen::MatrixXd> grad_w(params.weights.size());
        std::vector<Eigen::VectorXd> grad_b(params.weights.size());
        for (int l = static_cast<int>(params.weights.size()) - 1; l >= 0; --l) {
          grad_w[l] = delta * cache.activations[l].transpose();
          grad_b[l] = delta.rowwise().sum();
          if (l > 0) {
            delta = (params.weights[l].transpose() * delta).cwiseProduct(
                (1.0 - cache.activations[l].array().square()).matrix());
          }
        }

        // The rotation decode normalizes its inputs, so its gradient has a
        // pole at zero; a global norm clip keeps a step that lands near the
        // pole from catapulting the parameters.
        double norm_sq = 0.0;
        for (std::size_t l = 0; l < grad_w.size(); ++l)
          norm_sq += grad_w[l].squaredNorm() + grad_b[l].squaredNorm();
        const double scale =
            norm_sq > kGradClipNorm * kGradClipNorm ? kGradClipNorm / std::sqrt(norm_sq) : 1.0;

        for (std::size_t l = 0; l < params.weights.size(); ++l) {
          vel_w[l] = config.momentum * vel_w[l] - lr * scale * grad_w[l];
          vel_b[l] = config.momentum * vel_b[l] - lr * scale * grad_b[l];
          params.weights[l] += vel_w[l];
          params.biases[l] += vel_b[l];
        }

        result.curve.push_back({step, lr, loss.value});
        ++step;
      }
    }
  }
  return result;
}

ProposalSet predict_scene(const RegressorParams& params, const PointCloud& cloud,
                          double table_height) {
  const std::vector<PointFeature> features = extract_features(cloud, table_height);
  const std::vector<RegressorOutput> outputs = forward(params, features);
  const int levels = params.levels();

  ProposalSet proposals;
  proposals.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    GraspCandidate cand;
    cand.frame.pose.rotation = sixd_to_rotation(outputs[i].rotation);
    cand.frame.pose.translation = cloud.points[i] + outputs[i].offset;

    const Eigen::VectorXd& logits = outputs[i].logits;
    const Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
    const Eigen::VectorXd expd = shifted.array().exp();
    const Eigen::VectorXd probs = expd / expd.sum();
    double expected = 0.0;
    for (int k = 0; k < levels; ++k) expected += k * probs(k);
    cand.scores.robust = expected / (levels - 1);
    proposals.push_back(std::move(cand));
  }
  return proposals;
}

void save_params(const RegressorParams& params, const std::filesystem::path& path) {
  params.validate();
  std::string buf;
  buf.append(kParamsMagic, 4);
  put_u32(buf, kParamsVersion);
  put_u32(buf, static_cast<std::uint32_t>(params.weights.size() + 1));
  put_u32(buf, static_cast<std::uint32_t>(params.input_dim()));
  for (const Eigen::MatrixXd& w : params.weights)
    put_u32(buf, static_cast<std::uint32_t>(w.rows()));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Eigen::MatrixXd& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f32(buf, static_cast<float>(w(r, c)));
    for (Eigen::Index r = 0; r < params.biases[l].size(); ++r)
      put_f32(buf, static_cast<float>(params.biases[l](r)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_params: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("save_params: write failed for " + path.string());
}

RegressorParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_params: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  Reader r{data, "parameter"};
  r.need(4);
  if (std::memcmp(data.data(), kParamsMagic, 4) != 0)
    throw std::runtime_error("load_params: not a parameter file (bad magic)");
  r.pos = 4;
  const std::uint32_t version = r.u32();
  if (version != kParamsVersion) {
    std::ostringstream msg;
    msg << "load_params: version mismatch: file has version " << version << ", reader supports "
        << kParamsVersion;
    throw std::runtime_error(msg.str());
  }
  const std::uint32_t nsizes = r.u32();
  if (nsizes < 2) throw std::runtime_error("load_params: too few layers");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < nsizes; ++i) {
    const std::uint32_t s = r.u32();
    if (s == 0 || s > 1u << 20) throw std::runtime_error("load_params: bad layer size");
    sizes.push_back(static_cast<int>(s));
  }

  RegressorParams params = RegressorParams::zeros(sizes);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Eigen::MatrixXd& w = params.weights[l];
    for (Eigen::Index row = 0; row < w.rows(); ++row)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(row, c) = r.f32();
    for (Eigen::Index row = 0; row < params.biases[l].size(); ++row)
      params.biases[l](row) = r.f32();
  }
  if (r.pos != data.size()) throw std::runtime_error("load_params: trailing bytes");
  params.validate();
  return params;
}

void write_loss_curve(const std::vector<LossSample>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_loss_curve: cannot open " + path.string());
  out << "step,learning_rate,loss\n";
  out.precision(17);
  for (const LossSample& s : curve) {
    out << s.step << ',' << s.learning_rate << ',' << s.loss << '\n';
  }
  if (!out) throw std::runtime_error("write_loss_curve: write failed for " + path.string());
}

}  // namespace graspsynth
