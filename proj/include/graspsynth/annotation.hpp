#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graspsynth/contact.hpp"
#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Best grasp covering a point, if any. Level 0 never carries a grasp and
// every carried grasp quantizes to level >= 1.
struct PointAnnotation {
  std::optional<GraspCandidate> grasp;
  int score_level = 0;
};

// Robust-score class levels: level 0 is [0, boundaries[0]), level k is
// [boundaries[k-1], boundaries[k]), the top level is unbounded above.
// Level 0 is reserved for points without a viable grasp.
struct ScoreQuantizer {
  std::vector<double> boundaries{0.5, 2.0, 4.0};

  int levels() const { return static_cast<int>(boundaries.size()) + 1; }
  void validate() const;
  int quantize(double s) const;
};

struct AnnotatedScene {
  PointCloud view_cloud;
  std::vector<PointAnnotation> annotations;  // 1:1 with view_cloud
  std::string manifest;       // scene manifest path, when known
  double table_height = 0.0;  // filled by the pipeline for feature extraction
  std::vector<int> labels;    // per-point object index, -1 for the table (optional)
  int object_count = 0;       // objects in the scene, for recall denominators
};

// One sampled training point. Stored as float32 so that in-memory records
// equal their file round-trip bit for bit.
struct DatasetEntry {
  std::array<float, 3> position{};
  std::array<float, 3> normal{};
  std::uint8_t viable = 0;
  std::uint8_t score_level = 0;
  std::array<float, 12> pose{};   // row-major rotation | translation, zero when not viable
  std::array<float, 4> scores{};  // antipodal, occupancy, collision-free, robust

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetRecord {
  std::vector<DatasetEntry> points;
  std::uint64_t seed = 0;
  bool all_random = false;  // scene had no viable points; every slot drawn from the full cloud
  float table_height = 0.0f;
  std::string manifest;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

// Inverse indexing: each view point inside some grasp's closing region
// receives the highest-robust-score such grasp, ties broken toward the
// lower grasp index. Grasps whose robust score quantizes to level 0
// annotate nothing, so annotated points always have level >= 1.
AnnotatedScene annotate_scene(const PointCloud& view_cloud,
                              const std::vector<GraspCandidate>& grasps,
                              const GripperGeometry& gripper,
                              const ScoreQuantizer& quantizer = {});

// Class-balanced draw of n points: floor(n/8) slots from the annotated
// points and the rest from the others, each pool sampled without
// replacement when large enough and with replacement when scarce; the
// combined list is shuffled. A scene with no annotated points at all
// falls back to drawing every slot from the full cloud and sets
// all_random. Deterministic for a fixed seed.
DatasetRecord sample_training_points(const AnnotatedScene& scene, int n, std::uint64_t seed);

// Binary dataset container: header (magic, version, points per record,
// level count), then length-prefixed records with little-endian float32
// payloads. A JSON sidecar at <path>.json lists the source scene
// manifests and the quantizer boundaries.
void write_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path,
                   const ScoreQuantizer& quantizer = {});
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

}  // namespace graspsynth
