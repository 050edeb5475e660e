#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "graspsynth/evaluation.hpp"
#include "graspsynth/io.hpp"
#include "graspsynth/pipeline.hpp"
#include "graspsynth/rng.hpp"

using namespace graspsynth;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "graspsynth_pipeline_tests" / name;
  fs::create_directories(dir);
  return dir;
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::string read_bytes(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Facing wall strips centered at the given height, graspable by a frame
// sitting at (0, 0, z0) with x as its closing line.
void add_wall_pair(PointCloud& cloud, double gap, double z0) {
  for (int iy = -2; iy <= 2; ++iy) {
    for (int iz = 0; iz < 12; ++iz) {
      const double y = 0.003 * iy;
      const double z = z0 - 0.006 - 0.004 * iz;
      cloud.points.emplace_back(gap / 2, y, z);
      cloud.normals.emplace_back(Vec3(1, 0, 0));
      cloud.points.emplace_back(-gap / 2, y, z);
      cloud.normals.emplace_back(Vec3(-1, 0, 0));
    }
  }
}

PipelineConfig tiny_config() {
  PipelineConfig config;
  config.seed = 7;
  config.scenes = 1;
  config.objects = 4;
  config.samples_per_m2 = 30000.0;
  config.points_per_record = 64;
  config.train.epochs = 4;
  return config;
}

}  // namespace

TEST_CASE("config json round-trip preserves every field") {
  PipelineConfig config;
  config.seed = 99;
  config.scenes = 5;
  config.objects = 9;
  config.table_height = 0.1;
  config.samples_per_m2 = 12345.0;
  config.sigma = 0.001;
  config.voxel_leaf = 0.006;
  config.normal_k = 14;
  config.smoothing_slab = 0.02;
  config.contact_threshold = 0.65;
  config.approach_count = 4;
  config.floor_margin = 0.013;
  config.grasp_seed_points = 123;
  config.max_contact_pairs = 77;
  config.points_per_record = 160;
  config.boundaries = {0.4, 1.0, 3.0, 5.0};
  config.threads = 2;
  config.gripper.max_opening = 0.095;
  config.train.learning_rate = 0.01;
  config.train.epochs = 17;
  config.train.decay_every = 4;
  config.train.batch_size = 32;
  config.train.momentum = 0.5;
  config.train.divergence_limit = 1e4;
  config.train.loss_weights.rotation = 2.0;
  config.train.loss_weights.translation = 3.0;
  config.train.loss_weights.score = 4.0;
  config.selection.target_count = 6;
  config.selection.epsilon = 0.05;
  config.selection.tau = 2.0;
  config.selection.rot_weight = 0.01;

  const fs::path path = scratch_dir("config") / "roundtrip.json";
  save_pipeline_config(config, path);
  const PipelineConfig back = load_pipeline_config(path);
  CHECK(config_hash(back) == config_hash(config));
  CHECK(back.seed == 99);
  CHECK(back.boundaries == std::vector<double>{0.4, 1.0, 3.0, 5.0});
  CHECK(back.gripper.max_opening == 0.095);
  CHECK(back.train.loss_weights.translation == 3.0);
  CHECK(back.selection.tau == 2.0);

  // the hash tracks content, not identity
  PipelineConfig tweaked = config;
  tweaked.sigma = 0.002;
  CHECK(config_hash(tweaked) != config_hash(config));
}

TEST_CASE("config loader rejects unknown keys and bad values") {
  const fs::path dir = scratch_dir("config");
  const auto write_json = [&](const std::string& text) {
    const fs::path path = dir / "bad.json";
    std::ofstream os(path);
    os << text;
    os.close();
    return path;
  };

  CHECK(thrown_message([&] { load_pipeline_config(write_json(R"({"scens": 3})")); })
            .find("scens") != std::string::npos);
  CHECK(thrown_message([&] {
          load_pipeline_config(write_json(R"({"gripper": {"max_openin": 0.1}})"));
        }).find("max_openin") != std::string::npos);
  CHECK(thrown_message([&] {
          load_pipeline_config(write_json(R"({"train": {"loss_weights": {"rot": 1}}})"));
        }).find("rot") != std::string::npos);
  CHECK(thrown_message([&] {
          load_pipeline_config(write_json(R"({"selection": {"eps": 1}})"));
        }).find("eps") != std::string::npos);
  CHECK_THROWS_AS(load_pipeline_config(write_json("[]")), std::runtime_error);
  CHECK_THROWS_AS(load_pipeline_config(write_json("not json")), std::runtime_error);
  CHECK_THROWS_AS(load_pipeline_config(dir / "nonexistent.json"), std::runtime_error);
  CHECK_THROWS_AS(load_pipeline_config(write_json(R"({"scenes": 0})")), std::invalid_argument);

  PipelineConfig config;
  config.objects = 16;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = {};
  config.points_per_record = 7;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = {};
  config.contact_threshold = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = {};
  config.floor_margin = -0.01;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = {};
  config.boundaries = {2.0, 1.0};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("run layout numbers scene files") {
  const RunLayout run{"/base"};
  CHECK(run.scene_record(3).filename() == "scene_0003.json");
  CHECK(run.complete_cloud(0).filename() == "scene_0000_complete.ply");
  CHECK(run.view_cloud(12).filename() == "scene_0012_view.ply");
  CHECK(run.proposals(7).filename() == "scene_0007_grasps.jsonl");
  CHECK(run.selected(1).filename() == "scene_0001_selected.jsonl");
  CHECK(run.mesh(42).filename() == "scene_0042_mesh.obj");
  CHECK(run.config() == fs::path("/base/config.json"));
}

TEST_CASE("budgeted synthesis finds elevated grasps and replays exactly") {
  PointCloud view;
  add_wall_pair(view, 0.024, 0.2);    // graspable cluster well above the floor
  add_wall_pair(view, 0.024, 0.05);   // identical cluster near the floor
  const GripperGeometry gripper;
  SynthesisBudget budget;
  budget.contact_threshold = 0.5;
  budget.approach_count = 4;
  budget.seed_points = 0;
  budget.max_pairs = 0;

  const ProposalSet everywhere = synthesize_grasps(view, view, gripper, budget, 5);
  REQUIRE(!everywhere.empty());
  bool low = false, high = false;
  for (const GraspCandidate& c : everywhere) {
    (c.frame.origin().z() > 0.1 ? high : low) = true;
  }
  CHECK(high);
  CHECK(low);

  budget.floor_z = 0.1;
  const ProposalSet elevated = synthesize_grasps(view, view, gripper, budget, 5);
  REQUIRE(!elevated.empty());
  for (const GraspCandidate& c : elevated) CHECK(c.frame.origin().z() > 0.1);
  CHECK(elevated.size() < everywhere.size());

  const ProposalSet replay = synthesize_grasps(view, view, gripper, budget, 5);
  REQUIRE(replay.size() == elevated.size());
  for (std::size_t i = 0; i < replay.size(); ++i) {
    CHECK((replay[i].frame.pose.rotation.matrix().array() ==
           elevated[i].frame.pose.rotation.matrix().array())
              .all());
    CHECK(replay[i].frame.pose.translation == elevated[i].frame.pose.translation);
    CHECK(replay[i].scores.robust == elevated[i].scores.robust);
  }

  budget.floor_z = 0.5;  // everything filtered out
  CHECK(synthesize_grasps(view, view, gripper, budget, 5).empty());
}

TEST_CASE("synthesis budget knobs cap the search") {
  PointCloud view;
  add_wall_pair(view, 0.024, 0.2);
  const GripperGeometry gripper;
  SynthesisBudget budget;
  budget.contact_threshold = 0.5;
  budget.approach_count = 3;
  budget.seed_points = 0;
  budget.max_pairs = 2;
  const ProposalSet capped = synthesize_grasps(view, view, gripper, budget, 11);
  CHECK(!capped.empty());
  CHECK(capped.size() <= 2u * 3u);

  budget.max_pairs = 0;
  budget.perturb = false;
  const ProposalSet nominal = synthesize_grasps(view, view, gripper, budget, 11);
  for (const GraspCandidate& c : nominal) {
    const double product = c.scores.collision_free ? c.scores.antipodal * c.scores.occupancy : 0.0;
    CHECK(c.scores.robust == product);
  }
  budget.perturb = true;
  const ProposalSet perturbed = synthesize_grasps(view, view, gripper, budget, 11);
  REQUIRE(perturbed.size() == nominal.size());
  for (std::size_t i = 0; i < perturbed.size(); ++i)
    CHECK(perturbed[i].scores.robust <= nominal[i].scores.robust);

  PointCloud bare;
  bare.points.emplace_back(0.0, 0.0, 0.0);
  bare.points.emplace_back(0.01, 0.0, 0.0);
  CHECK_THROWS_AS(synthesize_grasps(bare, bare, gripper, budget, 1), std::runtime_error);
  budget.contact_threshold = 0.0;
  CHECK_THROWS_AS(synthesize_grasps(view, view, gripper, budget, 1), std::invalid_argument);
}

TEST_CASE("pipeline stages produce a complete run directory") {
  const fs::path dir = scratch_dir("full");
  fs::remove_all(dir);
  const PipelineConfig config = tiny_config();
  const RunLayout run{dir};

  run_synth(config, dir);
  CHECK(fs::exists(run.config()));
  const SceneRecord record = read_scene_record(run.scene_record(0).string());
  CHECK(record.scene.objects.size() == 4);
  const PointCloud complete = read_ply(run.complete_cloud(0));
  CHECK(complete.has_normals());
  CHECK(complete.size() > 1000);
  CHECK(read_labels(run.complete_labels(0)).size() == complete.size());

  run_render(dir);
  const PointCloud view = read_ply(run.view_cloud(0));
  CHECK(view.has_normals());
  CHECK(view.size() > 500);
  CHECK(read_labels(run.view_labels(0)).size() == view.size());

  run_annotate(dir);
  const std::vector<DatasetRecord> dataset = read_dataset(run.dataset());
  REQUIRE(dataset.size() == 1);
  CHECK(dataset[0].points.size() == 64);
  CHECK(!dataset[0].all_random);
  int viable = 0;
  for (const DatasetEntry& e : dataset[0].points) viable += e.viable;
  CHECK(viable == 8);
  CHECK(fs::exists(run.proposals(0)));

  run_train(dir);
  CHECK_NOTHROW(load_params(run.model()));
  std::ifstream curve(run.loss_curve());
  std::string line;
  int rows = 0;
  while (std::getline(curve, line)) ++rows;
  CHECK(rows == 1 + 4);  // header + one step per epoch on one record

  run_select(dir, 5);
  const ProposalSet selected = read_grasps_jsonl(run.selected(0));
  REQUIRE(!selected.empty());
  CHECK(selected.size() <= 5);
  for (std::size_t i = 0; i + 1 < selected.size(); ++i) {
    CHECK(selected[i].scores.robust >= selected[i + 1].scores.robust);
    for (std::size_t j = i + 1; j < selected.size(); ++j) {
      CHECK(grasp_distance(selected[i].frame, selected[j].frame,
                           config.selection.rot_weight) > config.selection.epsilon);
    }
  }
  CHECK(fs::exists(run.markers(0)));

  run_eval(dir);
  nlohmann::json report;
  std::ifstream(run.report()) >> report;
  const double antipodal = report.at("mean_antipodal").get<double>();
  const double clear = report.at("collision_free_fraction").get<double>();
  CHECK(antipodal >= 0.0);
  CHECK(antipodal <= 1.0);
  CHECK(clear >= 0.0);
  CHECK(clear <= 1.0);
  const auto cumulative = report.at("recall").at("cumulative").get<std::vector<double>>();
  REQUIRE(cumulative.size() == 6);
  for (std::size_t k = 1; k < cumulative.size(); ++k) CHECK(cumulative[k] >= cumulative[k - 1]);
  CHECK(report.at("recall").at("total_objects").get<int>() == 4);
  CHECK(fs::exists(run.recall_csv()));
  CHECK(fs::exists(run.proposals_csv()));

  run_export(dir);
  const TriangleMesh mesh = read_obj(run.mesh(0));
  CHECK(mesh.triangles.size() > 10);
  CHECK(fs::exists(run.top_markers(0)));

  nlohmann::json manifest;
  std::ifstream(run.manifest()) >> manifest;
  CHECK(manifest.at("tool_version").get<std::string>() == kToolVersion);
  for (const char* stage : {"synth", "render", "annotate", "train", "select", "eval", "export"})
    CHECK(manifest.at("stages").contains(stage));
  char expected_hash[32];
  std::snprintf(expected_hash, sizeof expected_hash, "%016llx",
                static_cast<unsigned long long>(config_hash(load_pipeline_config(run.config()))));
  CHECK(manifest.at("config_hash").get<std::string>() == expected_hash);
}

TEST_CASE("synth replays byte for byte") {
  const fs::path a = scratch_dir("replay_a");
  const fs::path b = scratch_dir("replay_b");
  fs::remove_all(a);
  fs::remove_all(b);
  const PipelineConfig config = tiny_config();
  run_synth(config, a);
  run_synth(config, b);
  const RunLayout run_a{a}, run_b{b};
  CHECK(read_bytes(run_a.config()) == read_bytes(run_b.config()));
  CHECK(read_bytes(run_a.scene_record(0)) == read_bytes(run_b.scene_record(0)));
  CHECK(read_bytes(run_a.complete_cloud(0)) == read_bytes(run_b.complete_cloud(0)));
  CHECK(read_bytes(run_a.manifest()) == read_bytes(run_b.manifest()));
}

TEST_CASE("stages demand their inputs") {
  const fs::path dir = scratch_dir("deps");
  fs::remove_all(dir);
  fs::create_directories(dir);
  CHECK(thrown_message([&] { run_render(dir); }).find("missing config.json") !=
        std::string::npos);

  PipelineConfig config = tiny_config();
  run_synth(config, dir);
  CHECK(thrown_message([&] { run_annotate(dir); }).find("run render first") != std::string::npos);
  CHECK(thrown_message([&] { run_train(dir); }).find("run annotate first") != std::string::npos);
  CHECK(thrown_message([&] { run_select(dir); }).find("run train first") != std::string::npos);
  CHECK(thrown_message([&] { run_eval(dir); }).find("run select first") != std::string::npos);
}
