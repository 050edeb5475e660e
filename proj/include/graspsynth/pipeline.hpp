#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "graspsynth/annotation.hpp"
#include "graspsynth/contact.hpp"
#include "graspsynth/regressor.hpp"
#include "graspsynth/scene.hpp"
#include "graspsynth/selection.hpp"

namespace graspsynth {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run needs, in one strict-schema JSON file. Unknown keys are
// rejected so typos fail loudly instead of silently using a default.
struct PipelineConfig {
  std::uint64_t seed = 7;
  int scenes = 2;
  int objects = 4;
  double table_height = 0.0;
  double samples_per_m2 = 100000.0;  // complete-cloud surface sampling
  double sigma = 0.003;              // depth noise
  double voxel_leaf = 0.004;
  int normal_k = 10;
  double smoothing_slab = 0.01;
  double contact_threshold = 0.5;
  int approach_count = 6;
  double floor_margin = 0.008;  // contact search ignores points this close to the table
  int grasp_seed_points = 600;  // contact search runs on this FPS subset; 0 = whole cloud
  int max_contact_pairs = 4000;
  int points_per_record = 800;
  std::vector<double> boundaries{0.5, 2.0, 4.0};
  int threads = 0;  // scene-level workers; 0 = hardware count
  GripperGeometry gripper;
  TrainConfig train;
  SelectionConfig selection;

  void validate() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void save_pipeline_config(const PipelineConfig& config, const std::filesystem::path& path);

// FNV-1a over the canonical JSON form; stamped into run manifests so a
// replay can prove it used the same configuration.
std::uint64_t config_hash(const PipelineConfig& config);

// File layout inside a run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path manifest() const { return root / "run.json"; }
  std::filesystem::path scene_record(int i) const;
  std::filesystem::path complete_cloud(int i) const;
  std::filesystem::path complete_labels(int i) const;
  std::filesystem::path view_cloud(int i) const;
  std::filesystem::path view_labels(int i) const;
  std::filesystem::path proposals(int i) const;
  std::filesystem::path dataset() const { return root / "dataset.gsds"; }
  std::filesystem::path model() const { return root / "model.gsnn"; }
  std::filesystem::path loss_curve() const { return root / "loss_curve.csv"; }
  std::filesystem::path selected(int i) const;
  std::filesystem::path markers(int i) const;
  std::filesystem::path report() const { return root / "eval" / "report.json"; }
  std::filesystem::path recall_csv() const { return root / "eval" / "recall.csv"; }
  std::filesystem::path proposals_csv() const { return root / "eval" / "proposals.csv"; }
  std::filesystem::path mesh(int i) const;
  std::filesystem::path top_markers(int i) const;
};

// Demo object catalog used by synth.
std::vector<ObjectModel> default_models();

// Budgeted exhaustive synthesis: contact pairs on a farthest-point subset
// of the view cloud, frames fanned around each closing line, robustness
// scored with contacts from the view cloud and collisions against the
// complete cloud.
struct SynthesisBudget {
  double contact_threshold = 0.7;
  int approach_count = 6;
  int seed_points = 600;
  int max_pairs = 4000;
  double floor_z = -std::numeric_limits<double>::infinity();  // search skips points at or below
  bool perturb = true;  // false: nominal-pose scores only

  void validate() const;
};

ProposalSet synthesize_grasps(const PointCloud& view_cloud, const PointCloud& scene_cloud,
                              const GripperGeometry& gripper, const SynthesisBudget& budget,
                              std::uint64_t seed);

// Pipeline stages. synth seeds the run directory with the effective config;
// every later stage reads it back from there, so a rerun of the same
// command sequence reproduces every artifact byte for byte.
void run_synth(const PipelineConfig& config, const std::filesystem::path& out_dir);
void run_render(const std::filesystem::path& out_dir);
void run_annotate(const std::filesystem::path& out_dir);
void run_train(const std::filesystem::path& out_dir);
void run_select(const std::filesystem::path& out_dir, int top_k = 0);  // 0: config value
void run_eval(const std::filesystem::path& out_dir);
void run_export(const std::filesystem::path& out_dir);

}  // namespace graspsynth
