#include "graspsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "graspsynth/cloud_ops.hpp"
#include "graspsynth/evaluation.hpp"
#include "graspsynth/io.hpp"
#include "graspsynth/rng.hpp"

namespace graspsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scene_stem(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04d", i);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Scene-level worker pool. Work items are pure per-scene functions writing
// to per-scene files, so completion order cannot affect the outputs.
void for_each_scene(int count, int threads, const std::function<void(int)>& fn) {
  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp(n, 1, std::max(count, 1));
  if (n <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::runtime_error(std::string("config: ") + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known)
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["scenes"] = c.scenes;
  j["objects"] = c.objects;
  j["table_height"] = c.table_height;
  j["samples_per_m2"] = c.samples_per_m2;
  j["sigma"] = c.sigma;
  j["voxel_leaf"] = c.voxel_leaf;
  j["normal_k"] = c.normal_k;
  j["smoothing_slab"] = c.smoothing_slab;
  j["contact_threshold"] = c.contact_threshold;
  j["approach_count"] = c.approach_count;
  j["floor_margin"] = c.floor_margin;
  j["grasp_seed_points"] = c.grasp_seed_points;
  j["max_contact_pairs"] = c.max_contact_pairs;
  j["points_per_record"] = c.points_per_record;
  j["boundaries"] = c.boundaries;
  j["threads"] = c.threads;
  j["gripper"] = {{"max_opening", c.gripper.max_opening},
                  {"finger_length", c.gripper.finger_length},
                  {"finger_thickness", c.gripper.finger_thickness},
                  {"palm_depth", c.gripper.palm_depth},
                  {"pad_deformation", c.gripper.pad_deformation},
                  {"smoothing_radius", c.gripper.smoothing_radius}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"epochs", c.train.epochs},
                {"decay_every", c.train.decay_every},
                {"batch_size", c.train.batch_size},
                {"momentum", c.train.momentum},
                {"divergence_limit", c.train.divergence_limit},
                {"loss_weights",
                 {{"rotation", c.train.loss_weights.rotation},
                  {"translation", c.train.loss_weights.translation},
                  {"score", c.train.loss_weights.score}}}};
  j["selection"] = {{"target_count", c.selection.target_count},
                    {"epsilon", c.selection.epsilon},
                    {"tau", c.selection.tau},
                    {"rot_weight", c.selection.rot_weight}};
  return j;
}

PipelineConfig config_from_json(const json& j) {
  check_keys(j, "the top level",
             {"seed", "scenes", "objects", "table_height", "samples_per_m2", "sigma",
              "voxel_leaf", "normal_k", "smoothing_slab", "contact_threshold", "approach_count",
              "floor_margin", "grasp_seed_points", "max_contact_pairs", "points_per_record",
              "boundaries", "threads", "gripper", "train", "selection"});
  PipelineConfig c;
  read_field(j, "seed", c.seed);
  read_field(j, "scenes", c.scenes);
  read_field(j, "objects", c.objects);
  read_field(j, "table_height", c.table_height);
  read_field(j, "samples_per_m2", c.samples_per_m2);
  read_field(j, "sigma", c.sigma);
  read_field(j, "voxel_leaf", c.voxel_leaf);
  read_field(j, "normal_k", c.normal_k);
  read_field(j, "smoothing_slab", c.smoothing_slab);
  read_field(j, "contact_threshold", c.contact_threshold);
  read_field(j, "approach_count", c.approach_count);
  read_field(j, "floor_margin", c.floor_margin);
  read_field(j, "grasp_seed_points", c.grasp_seed_points);
  read_field(j, "max_contact_pairs", c.max_contact_pairs);
  read_field(j, "points_per_record", c.points_per_record);
  read_field(j, "boundaries", c.boundaries);
  read_field(j, "threads", c.threads);
  if (j.contains("gripper")) {
    const json& g = j.at("gripper");
    check_keys(g, "gripper", {"max_opening", "finger_length", "finger_thickness", "palm_depth",
                              "pad_deformation", "smoothing_radius"});
    read_field(g, "max_opening", c.gripper.max_opening);
    read_field(g, "finger_length", c.gripper.finger_length);
    read_field(g, "finger_thickness", c.gripper.finger_thickness);
    read_field(g, "palm_depth", c.gripper.palm_depth);
    read_field(g, "pad_deformation", c.gripper.pad_deformation);
    read_field(g, "smoothing_radius", c.gripper.smoothing_radius);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, "train", {"learning_rate", "epochs", "decay_every", "batch_size", "momentum",
                            "divergence_limit", "loss_weights"});
    read_field(t, "learning_rate", c.train.learning_rate);
    read_field(t, "epochs", c.train.epochs);
    read_field(t, "decay_every", c.train.decay_every);
    read_field(t, "batch_size", c.train.batch_size);
    read_field(t, "momentum", c.train.momentum);
    read_field(t, "divergence_limit", c.train.divergence_limit);
    if (t.contains("loss_weights")) {
      const json& w = t.at("loss_weights");
      check_keys(w, "loss_weights", {"rotation", "translation", "score"});
      read_field(w, "rotation", c.train.loss_weights.rotation);
      read_field(w, "translation", c.train.loss_weights.translation);
      read_field(w, "score", c.train.loss_weights.score);
    }
  }
  if (j.contains("selection")) {
    const json& s = j.at("selection");
    check_keys(s, "selection", {"target_count", "epsilon", "tau", "rot_weight"});
    read_field(s, "target_count", c.selection.target_count);
    read_field(s, "epsilon", c.selection.epsilon);
    read_field(s, "tau", c.selection.tau);
    read_field(s, "rot_weight", c.selection.rot_weight);
  }
  return c;
}

PipelineConfig stage_config(const RunLayout& run) {
  if (!fs::exists(run.config()))
    throw std::runtime_error(run.root.string() + ": missing config.json (run synth first)");
  return load_pipeline_config(run.config());
}

void require_input(const fs::path& path, const char* producer) {
  if (!fs::exists(path))
    throw std::runtime_error(path.string() + ": missing (run " + producer + " first)");
}

json load_manifest(const RunLayout& run) {
  if (!fs::exists(run.manifest())) return json::object();
  std::ifstream is(run.manifest());
  json j;
  is >> j;
  return j;
}

void record_stage(const RunLayout& run, const PipelineConfig& config, const std::string& stage,
                  json details) {
  json j = load_manifest(run);
  j["tool_version"] = kToolVersion;
  j["seed"] = config.seed;
  j["config_hash"] = hash_hex(config_hash(config));
  j["stages"][stage] = std::move(details);
  std::ofstream os(run.manifest());
  if (!os) throw std::runtime_error(run.manifest().string() + ": cannot open for writing");
  os << j.dump(2) << "\n";
}

ScoreQuantizer run_quantizer(const PipelineConfig& config) {
  ScoreQuantizer q;
  q.boundaries = config.boundaries;
  return q;
}

// Annotation replay used by eval: reconstructs the dense labels for one
// scene from its stored artifacts.
AnnotatedScene load_annotated_scene(const RunLayout& run, const PipelineConfig& config, int i) {
  require_input(run.view_cloud(i), "render");
  require_input(run.proposals(i), "annotate");
  const PointCloud view = read_ply(run.view_cloud(i));
  const ProposalSet proposals = read_grasps_jsonl(run.proposals(i));
  const SceneRecord record = read_scene_record(run.scene_record(i).string());
  AnnotatedScene scene = annotate_scene(view, proposals, config.gripper, run_quantizer(config));
  scene.table_height = record.scene.table_height;
  scene.manifest = run.scene_record(i).filename().string();
  scene.labels = read_labels(run.view_labels(i));
  scene.object_count = static_cast<int>(record.scene.objects.size());
  return scene;
}

}  // namespace

void PipelineConfig::validate() const {
  if (scenes < 1) throw std::invalid_argument("config: scenes must be at least 1");
  if (objects < 1 || objects > 15)
    throw std::invalid_argument("config: objects must be between 1 and 15");
  if (!(samples_per_m2 > 0.0))
    throw std::invalid_argument("config: samples_per_m2 must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("config: sigma must be non-negative");
  if (!(voxel_leaf > 0.0)) throw std::invalid_argument("config: voxel_leaf must be positive");
  if (normal_k < 3) throw std::invalid_argument("config: normal_k must be at least 3");
  if (!(smoothing_slab > 0.0))
    throw std::invalid_argument("config: smoothing_slab must be positive");
  if (!(floor_margin >= 0.0))
    throw std::invalid_argument("config: floor_margin must be non-negative");
  if (points_per_record < 8)
    throw std::invalid_argument("config: points_per_record must be at least 8");
  if (threads < 0) throw std::invalid_argument("config: threads must be non-negative");
  SynthesisBudget budget;
  budget.contact_threshold = contact_threshold;
  budget.approach_count = approach_count;
  budget.seed_points = grasp_seed_points;
  budget.max_pairs = max_contact_pairs;
  budget.validate();
  ScoreQuantizer q;
  q.boundaries = boundaries;
  q.validate();
  gripper.validate();
  TrainConfig tc = train;
  tc.levels = static_cast<int>(boundaries.size()) + 1;
  tc.validate();
  selection.validate();
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(path.string() + ": cannot open");
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  PipelineConfig config;
  try {
    config = config_from_json(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

void save_pipeline_config(const PipelineConfig& config, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
  os << config_to_json(config).dump(2) << "\n";
}

std::uint64_t config_hash(const PipelineConfig& config) {
  const std::string bytes = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

fs::path RunLayout::scene_record(int i) const {
  return root / "scenes" / (scene_stem(i) + ".json");
}
fs::path RunLayout::complete_cloud(int i) const {
  return root / "scenes" / (scene_stem(i) + "_complete.ply");
}
fs::path RunLayout::complete_labels(int i) const {
  return root / "scenes" / (scene_stem(i) + "_labels.bin");
}
fs::path RunLayout::view_cloud(int i) const {
  return root / "views" / (scene_stem(i) + "_view.ply");
}
fs::path RunLayout::view_labels(int i) const {
  return root / "views" / (scene_stem(i) + "_labels.bin");
}
fs::path RunLayout::proposals(int i) const {
  return root / "annotations" / (scene_stem(i) + "_grasps.jsonl");
}
fs::path RunLayout::selected(int i) const {
  return root / "selection" / (scene_stem(i) + "_selected.jsonl");
}
fs::path RunLayout::markers(int i) const {
  return root / "selection" / (scene_stem(i) + "_markers.ply");
}
fs::path RunLayout::mesh(int i) const {
  return root / "export" / (scene_stem(i) + "_mesh.obj");
}
fs::path RunLayout::top_markers(int i) const {
  return root / "export" / (scene_stem(i) + "_top_grasps.ply");
}

std::vector<ObjectModel> default_models() {
  std::vector<ObjectModel> models;
  models.push_back(make_object("box", make_box(0.06, 0.05, 0.04)));
  models.push_back(make_object("slab", make_box(0.09, 0.06, 0.02)));
  models.push_back(make_object("can", make_cylinder(0.025, 0.07, 16)));
  models.push_back(make_object("puck", make_cylinder(0.035, 0.02, 16)));
  models.push_back(make_object("wedge", make_wedge(0.06, 0.05, 0.04)));
  return models;
}

void SynthesisBudget::validate() const {
  if (!(contact_threshold > 0.0) || contact_threshold > 1.0)
    throw std::invalid_argument("synthesis: contact_threshold must be in (0, 1]");
  if (approach_count < 1) throw std::invalid_argument("synthesis: approach_count must be positive");
  if (seed_points < 0) throw std::invalid_argument("synthesis: seed_points must be non-negative");
  if (max_pairs < 0) throw std::invalid_argument("synthesis: max_pairs must be non-negative");
}

ProposalSet synthesize_grasps(const PointCloud& view_cloud, const PointCloud& scene_cloud,
                              const GripperGeometry& gripper, const SynthesisBudget& budget,
                              std::uint64_t seed) {
  budget.validate();
  view_cloud.require_normals();

  std::vector<int> elevated;
  for (int i = 0; i < static_cast<int>(view_cloud.size()); ++i) {
    if (view_cloud.points[i].z() > budget.floor_z) elevated.push_back(i);
  }
  if (elevated.size() < 2) return {};

  PointCloud search = select_points(view_cloud, elevated);
  if (budget.seed_points > 0 && static_cast<int>(search.size()) > budget.seed_points) {
    const std::vector<int> picks =
        farthest_point_sampling(search, budget.seed_points, mix_seed(seed, 1));
    search = select_points(search, picks);
  }
  std::vector<ContactPair> pairs = find_contact_pairs(search, gripper, budget.contact_threshold);
  if (budget.max_pairs > 0 && static_cast<int>(pairs.size()) > budget.max_pairs) {
    Rng rng(mix_seed(seed, 2));
    rng.shuffle(pairs);
    pairs.resize(budget.max_pairs);
  }

  const PointBvh view_index(view_cloud.points);
  const PointBvh scene_index(scene_cloud.points);
  ProposalSet out;
  for (const ContactPair& pair : pairs) {
    for (const GraspFrame& frame : frames_from_pair(pair, search, gripper, budget.approach_count)) {
      const std::vector<Twist> perturbations =
          budget.perturb ? default_perturbations(frame) : std::vector<Twist>{};
      GraspCandidate cand;
      cand.frame = frame;
      cand.scores = robust_score(frame, view_cloud, view_index, scene_cloud, scene_index, gripper,
                                 perturbations);
      out.push_back(cand);
    }
  }
  return out;
}

void run_synth(const PipelineConfig& config, const fs::path& out_dir) {
  config.validate();
  const RunLayout run{out_dir};
  fs::create_directories(run.root / "scenes");
  save_pipeline_config(config, run.config());
  const std::vector<ObjectModel> models = default_models();

  for_each_scene(config.scenes, config.threads, [&](int i) {
    SettleParams params;
    params.table_height = config.table_height;
    const std::uint64_t scene_seed = mix_seed(config.seed, 100 + i);
    const Scene scene = settle_scene(models, config.objects, scene_seed, params);
    SceneRecord record;
    record.scene = scene;
    record.camera = default_camera(config.table_height);
    record.sigma = config.sigma;
    record.seed = scene_seed;
    write_scene_record(run.scene_record(i).string(), record);

    std::vector<int> labels;
    const PointCloud complete = assemble_scene_cloud(scene, models, config.samples_per_m2,
                                                     mix_seed(config.seed, 200 + i), &labels);
    write_ply(run.complete_cloud(i), complete);
    write_labels(run.complete_labels(i), labels);
  });

  record_stage(run, config, "synth", {{"scenes", config.scenes}, {"objects", config.objects}});
}

void run_render(const fs::path& out_dir) {
  const RunLayout run{out_dir};
  const PipelineConfig config = stage_config(run);
  fs::create_directories(run.root / "views");
  const std::vector<ObjectModel> models = default_models();

  for_each_scene(config.scenes, config.threads, [&](int i) {
    require_input(run.scene_record(i), "synth");
    const SceneRecord record = read_scene_record(run.scene_record(i).string());
    std::vector<int> ray_labels;
    const PointCloud rendered = render_view_cloud(record.scene, models, record.camera, &ray_labels);
    NoiseModel noise;
    noise.sigma = record.sigma;
    const PointCloud noisy = apply_depth_noise(rendered, record.camera.pose.translation, noise,
                                               mix_seed(config.seed, 300 + i));
    std::vector<int> first_member;
    PointCloud view = voxel_downsample_map(noisy, config.voxel_leaf, &first_member);
    std::vector<int> labels(first_member.size());
    for (std::size_t k = 0; k < first_member.size(); ++k) labels[k] = ray_labels[first_member[k]];
    estimate_raw_normals(view, config.normal_k, record.camera.pose.translation);
    smooth_all_normals(view, config.gripper.smoothing_radius, config.smoothing_slab);
    write_ply(run.view_cloud(i), view);
    write_labels(run.view_labels(i), labels);
  });

  record_stage(run, config, "render", {{"scenes", config.scenes}});
}

void run_annotate(const fs::path& out_dir) {
  const RunLayout run{out_dir};
  const PipelineConfig config = stage_config(run);
  fs::create_directories(run.root / "annotations");
  const ScoreQuantizer quantizer = run_quantizer(config);

  std::vector<DatasetRecord> records(config.scenes);
  std::vector<std::int64_t> proposal_counts(config.scenes);
  for_each_scene(config.scenes, config.threads, [&](int i) {
    require_input(run.view_cloud(i), "render");
    const PointCloud view = read_ply(run.view_cloud(i));
    const PointCloud complete = read_ply(run.complete_cloud(i));
    const SceneRecord record = read_scene_record(run.scene_record(i).string());

    SynthesisBudget budget;
    budget.contact_threshold = config.contact_threshold;
    budget.approach_count = config.approach_count;
    budget.seed_points = config.grasp_seed_points;
    budget.max_pairs = config.max_contact_pairs;
    budget.floor_z = record.scene.table_height + config.floor_margin;
    const ProposalSet proposals =
        synthesize_grasps(view, complete, config.gripper, budget, mix_seed(config.seed, 400 + i));
    write_grasps_jsonl(run.proposals(i), proposals);

    AnnotatedScene annotated = annotate_scene(view, proposals, config.gripper, quantizer);
    annotated.table_height = record.scene.table_height;
    annotated.manifest = run.scene_record(i).filename().string();
    annotated.labels = read_labels(run.view_labels(i));
    annotated.object_count = static_cast<int>(record.scene.objects.size());

    records[i] =
        sample_training_points(annotated, config.points_per_record, mix_seed(config.seed, 500 + i));
    proposal_counts[i] = static_cast<std::int64_t>(proposals.size());
  });

  write_dataset(records, run.dataset(), quantizer);
  record_stage(run, config, "annotate",
               {{"scenes", config.scenes},
                {"points_per_record", config.points_per_record},
                {"proposals", proposal_counts}});
}

void run_train(const fs::path& out_dir) {
  const RunLayout run{out_dir};
  const PipelineConfig config = stage_config(run);
  require_input(run.dataset(), "annotate");
  const std::vector<DatasetRecord> records = read_dataset(run.dataset());

  TrainConfig tc = config.train;
  tc.levels = static_cast<int>(config.boundaries.size()) + 1;
  tc.seed = mix_seed(config.seed, 600);
  const TrainResult result = train(records, tc);
  save_params(result.params, run.model());
  write_loss_curve(result.curve, run.loss_curve());

  record_stage(run, config, "train",
               {{"steps", result.curve.size()},
                {"final_loss", result.curve.empty() ? 0.0 : result.curve.back().loss}});
}

void run_select(const fs::path& out_dir, int top_k) {
  const RunLayout run{out_dir};
  const PipelineConfig config = stage_config(run);
  require_input(run.model(), "train");
  const RegressorParams params = load_params(run.model());
  SelectionConfig selection = config.selection;
  if (top_k > 0) selection.target_count = top_k;
  selection.validate();
  fs::create_directories(run.root / "selection");

  std::vector<std::int64_t> counts(config.scenes);
  for_each_scene(config.scenes, config.threads, [&](int i) {
    require_input(run.view_cloud(i), "render");
    const PointCloud view = read_ply(run.view_cloud(i));
    const SceneRecord record = read_scene_record(run.scene_record(i).string());
    const ProposalSet proposals = predict_scene(params, view, record.scene.table_height);

    const PointBvh view_index(view.points);
    const auto collides = [&](const GraspFrame& frame) {
      return collision_check(view, view_index, frame, config.gripper);
    };
    const ExecutableSet set = nms_select(proposals, selection, collides);
    write_grasps_jsonl(run.selected(i), set.grasps);
    write_grasp_markers_ply(run.markers(i), set.grasps, config.gripper);
    counts[i] = static_cast<std::int64_t>(set.grasps.size());
  });

  record_stage(run, config, "select",
               {{"top_k", selection.target_count}, {"selected", counts}});
}

void run_eval(const fs::path& out_dir) {
  const RunLayout run{out_dir};
  const PipelineConfig config = stage_config(run);
  fs::create_directories(run.root / "eval");

  std::vector<ProposalMetrics> metrics(config.scenes);
  std::vector<AnnotatedScene> annotated(config.scenes);
  for_each_scene(config.scenes, config.threads, [&](int i) {
    require_input(run.selected(i), "select");
    const PointCloud complete = read_ply(run.complete_cloud(i));
    const ProposalSet selected = read_grasps_jsonl(run.selected(i));
    metrics[i] = evaluate_proposals(selected, complete, config.gripper);
    annotated[i] = load_annotated_scene(run, config, i);
  });

  const RecallTable table = recall_by_angle(annotated, {}, run_quantizer(config));

  {
    std::ofstream os(run.proposals_csv());
    if (!os) throw std::runtime_error(run.proposals_csv().string() + ": cannot open for writing");
    os << std::setprecision(17);
    os << "scene,evaluated,mean_antipodal,collision_free_fraction\n";
    for (int i = 0; i < config.scenes; ++i) {
      os << i << "," << metrics[i].evaluated << "," << metrics[i].mean_antipodal << ","
         << metrics[i].collision_free_fraction << "\n";
    }
  }
  {
    std::ofstream os(run.recall_csv());
    if (!os) throw std::runtime_error(run.recall_csv().string() + ": cannot open for writing");
    os << std::setprecision(17);
    os << "cutoff_deg,per_bin,cumulative,simple,semi_dense,dense\n";
    for (std::size_t k = 0; k < table.cutoffs.size(); ++k) {
      os << table.cutoffs[k] * 180.0 / M_PI << "," << table.per_bin[k] << ","
         << table.cumulative[k] << "," << table.band_cumulative[0][k] << ","
         << table.band_cumulative[1][k] << "," << table.band_cumulative[2][k] << "\n";
    }
  }

  double antipodal_sum = 0.0, clear_sum = 0.0;
  std::int64_t evaluated = 0;
  for (const ProposalMetrics& m : metrics) {
    antipodal_sum += m.mean_antipodal * m.evaluated;
    clear_sum += m.collision_free_fraction * m.evaluated;
    evaluated += m.evaluated;
  }
  json report;
  report["tool_version"] = kToolVersion;
  report["config_hash"] = hash_hex(config_hash(config));
  report["scenes"] = config.scenes;
  report["evaluated_grasps"] = evaluated;
  report["mean_antipodal"] = evaluated ? antipodal_sum / evaluated : 0.0;
  report["collision_free_fraction"] = evaluated ? clear_sum / evaluated : 0.0;
  json cutoffs_deg = json::array();
  for (const double c : table.cutoffs) cutoffs_deg.push_back(c * 180.0 / M_PI);
  report["recall"] = {{"cutoffs_deg", cutoffs_deg},
                      {"per_bin", table.per_bin},
                      {"cumulative", table.cumulative},
                      {"band_cumulative",
                       {{"simple", table.band_cumulative[0]},
                        {"semi_dense", table.band_cumulative[1]},
                        {"dense", table.band_cumulative[2]}}},
                      {"band_objects", table.band_objects},
                      {"total_objects", table.total_objects}};
  {
    std::ofstream os(run.report());
    if (!os) throw std::runtime_error(run.report().string() + ": cannot open for writing");
    os << report.dump(2) << "\n";
  }

  record_stage(run, config, "eval",
               {{"mean_antipodal", report["mean_antipodal"]},
                {"collision_free_fraction", report["collision_free_fraction"]},
                {"total_objects", table.total_objects}});
}

void run_export(const fs::path& out_dir) {
  const RunLayout run{out_dir};
  const PipelineConfig config = stage_config(run);
  fs::create_directories(run.root / "export");
  const std::vector<ObjectModel> models = default_models();

  for_each_scene(config.scenes, config.threads, [&](int i) {
    require_input(run.scene_record(i), "synth");
    const SceneRecord record = read_scene_record(run.scene_record(i).string());

    TriangleMesh merged;
    for (const PlacedObject& placed : record.scene.objects) {
      const TriangleMesh& mesh = find_model(models, placed.id).mesh;
      const int base = static_cast<int>(merged.vertices.size());
      for (const Vec3& v : mesh.vertices) merged.vertices.push_back(placed.pose.apply(v));
      for (const auto& t : mesh.triangles)
        merged.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
    const int base = static_cast<int>(merged.vertices.size());
    const double half = kTableSize / 2.0;
    const double h = record.scene.table_height;
    merged.vertices.emplace_back(-half, -half, h);
    merged.vertices.emplace_back(half, -half, h);
    merged.vertices.emplace_back(half, half, h);
    merged.vertices.emplace_back(-half, half, h);
    merged.triangles.push_back({base, base + 1, base + 2});
    merged.triangles.push_back({base, base + 2, base + 3});
    write_obj(run.mesh(i), merged);

    if (fs::exists(run.proposals(i))) {
      ProposalSet proposals = read_grasps_jsonl(run.proposals(i));
      std::stable_sort(proposals.begin(), proposals.end(),
                       [](const GraspCandidate& a, const GraspCandidate& b) {
                         return a.scores.robust > b.scores.robust;
                       });
      if (proposals.size() > 20) proposals.resize(20);
      write_grasp_markers_ply(run.top_markers(i), proposals, config.gripper);
    }
  });

  record_stage(run, config, "export", {{"scenes", config.scenes}});
}

}  // namespace graspsynth
