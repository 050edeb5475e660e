#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

#include "graspsynth/annotation.hpp"
#include "graspsynth/rng.hpp"

using namespace graspsynth;

namespace {

std::filesystem::path scratch_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "graspsynth_annotation_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Vec3 random_unit(Rng& rng) {
  while (true) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    if (v.norm() > 1e-6) return v.normalized();
  }
}

GraspFrame identity_frame_at(const Vec3& t) {
  return {RigidTransform{RotationMatrix::identity(), t}};
}

GraspCandidate candidate(const GraspFrame& frame, double robust) {
  GraspCandidate c;
  c.frame = frame;
  c.scores.antipodal = 1.0;
  c.scores.occupancy = 6.0;
  c.scores.collision_free = true;
  c.scores.robust = robust;
  return c;
}

// Test-side closing-region membership: boundary-inclusive box in gripper
// coordinates.
bool in_region(const GraspFrame& f, const GripperGeometry& g, const Vec3& p) {
  const Vec3 q = f.pose.inverse().apply(p);
  return std::abs(q.x()) <= g.max_opening / 2.0 && std::abs(q.y()) <= g.finger_thickness / 2.0 &&
         q.z() <= 0.0 && q.z() >= -g.finger_length;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(bool(out));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

DatasetEntry make_entry(Rng& rng, int levels) {
  DatasetEntry e;
  for (float& f : e.position) f = static_cast<float>(rng.normal());
  for (float& f : e.normal) f = static_cast<float>(rng.normal());
  const int level = static_cast<int>(rng.uniform_index(levels));
  e.score_level = static_cast<std::uint8_t>(level);
  e.viable = level > 0 ? 1 : 0;
  if (e.viable) {
    for (float& f : e.pose) f = static_cast<float>(rng.normal());
    for (float& f : e.scores) f = static_cast<float>(rng.uniform());
  }
  return e;
}

}  // namespace

TEST_CASE("quantizer maps scores to half-open levels") {
  const ScoreQuantizer q;
  CHECK(q.levels() == 4);
  CHECK(q.quantize(0.0) == 0);
  CHECK(q.quantize(0.49) == 0);
  CHECK(q.quantize(0.5) == 1);
  CHECK(q.quantize(1.99) == 1);
  CHECK(q.quantize(2.0) == 2);  // lower edge belongs to the upper level
  CHECK(q.quantize(3.999) == 2);
  CHECK(q.quantize(4.0) == 3);
  CHECK(q.quantize(6.0) == 3);  // highest attainable robust score
  CHECK(q.quantize(100.0) == 3);

  const ScoreQuantizer two{{1.0}};
  CHECK(two.levels() == 2);
  CHECK(two.quantize(0.999) == 0);
  CHECK(two.quantize(1.0) == 1);
}

TEST_CASE("quantizer is monotone in the score") {
  const ScoreQuantizer q;
  Rng rng(11);
  std::vector<double> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(rng.uniform(0.0, 7.0));
  std::sort(samples.begin(), samples.end());
  int prev = 0;
  for (double s : samples) {
    const int level = q.quantize(s);
    CHECK(level >= prev);
    prev = level;
  }
}

TEST_CASE("quantizer rejects malformed boundaries and negative scores") {
  CHECK_THROWS_AS((ScoreQuantizer{std::vector<double>{}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ScoreQuantizer{{0.5, 0.5}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ScoreQuantizer{{2.0, 1.0}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ScoreQuantizer{{0.0, 1.0}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ScoreQuantizer{{-1.0, 1.0}}.validate()), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((ScoreQuantizer{{nan}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(ScoreQuantizer{}.quantize(-0.001), std::invalid_argument);
}

TEST_CASE("single grasp annotates exactly the points in its region") {
  const GripperGeometry gripper;
  PointCloud cloud;
  cloud.points = {
      Vec3(0.0, 0.0, -0.03),   // mid-region
      Vec3(0.0, 0.0, 0.0),     // region boundary (fingertip plane)
      Vec3(0.0, 0.0, -0.08),   // behind the base plane
      Vec3(0.06, 0.0, -0.03),  // beyond the pads
      Vec3(0.0, 0.0, 0.02),    // in front of the fingertips
  };
  const auto grasp = candidate(identity_frame_at(Vec3::Zero()), 3.0);
  const auto annotated = annotate_scene(cloud, {grasp}, gripper);

  REQUIRE(annotated.annotations.size() == cloud.size());
  CHECK(annotated.view_cloud.points.size() == cloud.size());
  for (int idx : {0, 1}) {
    REQUIRE(annotated.annotations[idx].grasp.has_value());
    CHECK(annotated.annotations[idx].score_level == 2);
    CHECK(annotated.annotations[idx].grasp->scores.robust == 3.0);
  }
  for (int idx : {2, 3, 4}) {
    CHECK_FALSE(annotated.annotations[idx].grasp.has_value());
    CHECK(annotated.annotations[idx].score_level == 0);
  }
}

TEST_CASE("overlapping regions resolve to the higher robust score") {
  const GripperGeometry gripper;
  PointCloud cloud;
  cloud.points = {Vec3(0.0, 0.0, -0.03)};
  const auto weak = candidate(identity_frame_at(Vec3(0.001, 0.0, 0.0)), 0.9);
  const auto strong = candidate(identity_frame_at(Vec3(-0.001, 0.0, 0.0)), 0.4);

  SUBCASE("stronger grasp listed first") {
    const auto annotated = annotate_scene(cloud, {weak, strong}, gripper);
    REQUIRE(annotated.annotations[0].grasp.has_value());
    CHECK(annotated.annotations[0].grasp->scores.robust == 0.9);
    CHECK(annotated.annotations[0].grasp->frame.origin().x() == 0.001);
    CHECK(annotated.annotations[0].score_level == 1);
  }
  SUBCASE("stronger grasp listed second") {
    const auto annotated = annotate_scene(cloud, {strong, weak}, gripper);
    REQUIRE(annotated.annotations[0].grasp.has_value());
    CHECK(annotated.annotations[0].grasp->scores.robust == 0.9);
  }
}

TEST_CASE("equal scores break ties toward the lower grasp index") {
  const GripperGeometry gripper;
  PointCloud cloud;
  cloud.points = {Vec3(0.0, 0.0, -0.03)};
  const auto first = candidate(identity_frame_at(Vec3(0.002, 0.0, 0.0)), 1.5);
  const auto second = candidate(identity_frame_at(Vec3(-0.002, 0.0, 0.0)), 1.5);
  const auto annotated = annotate_scene(cloud, {first, second}, gripper);
  REQUIRE(annotated.annotations[0].grasp.has_value());
  CHECK(annotated.annotations[0].grasp->frame.origin().x() == 0.002);
}

TEST_CASE("grasps below the first boundary annotate nothing") {
  const GripperGeometry gripper;
  PointCloud cloud;
  cloud.points = {Vec3(0.0, 0.0, -0.03)};
  const auto low = candidate(identity_frame_at(Vec3::Zero()), 0.49);
  const auto annotated = annotate_scene(cloud, {low}, gripper);
  CHECK_FALSE(annotated.annotations[0].grasp.has_value());
  CHECK(annotated.annotations[0].score_level == 0);

  // The same grasp above the boundary does annotate: the region is not empty.
  const auto ok = candidate(identity_frame_at(Vec3::Zero()), 0.51);
  const auto annotated2 = annotate_scene(cloud, {ok}, gripper);
  CHECK(annotated2.annotations[0].grasp.has_value());
  CHECK(annotated2.annotations[0].score_level == 1);
}

TEST_CASE("annotation equals the exhaustive point-by-grasp matrix") {
  const GripperGeometry gripper;
  const ScoreQuantizer quantizer;
  Rng rng(303);

  PointCloud cloud;
  for (int i = 0; i < 2000; ++i) {
    cloud.points.emplace_back(rng.uniform(-0.12, 0.12), rng.uniform(-0.12, 0.12),
                              rng.uniform(-0.12, 0.12));
  }
  std::vector<GraspCandidate> grasps;
  for (int g = 0; g < 50; ++g) {
    const RotationMatrix rot = RotationMatrix::about_axis(random_unit(rng), rng.uniform(0, M_PI)) *
                               RotationMatrix::about_axis(random_unit(rng), rng.uniform(0, M_PI));
    const Vec3 t(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    grasps.push_back(candidate({RigidTransform{rot, t}}, rng.uniform(0.0, 6.0)));
  }

  const auto annotated = annotate_scene(cloud, grasps, gripper, quantizer);
  REQUIRE(annotated.annotations.size() == cloud.size());

  int covered = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    int best = -1;
    for (std::size_t g = 0; g < grasps.size(); ++g) {
      if (quantizer.quantize(grasps[g].scores.robust) == 0) continue;
      if (!in_region(grasps[g].frame, gripper, cloud.points[i])) continue;
      if (best < 0 || grasps[g].scores.robust > grasps[best].scores.robust) {
        best = static_cast<int>(g);
      }
    }
    const PointAnnotation& a = annotated.annotations[i];
    if (best < 0) {
      CHECK_FALSE(a.grasp.has_value());
      CHECK(a.score_level == 0);
    } else {
      ++covered;
      REQUIRE(a.grasp.has_value());
      CHECK(a.grasp->scores.robust == grasps[best].scores.robust);
      CHECK(a.grasp->frame.origin() == grasps[best].frame.origin());
      CHECK(a.score_level == quantizer.quantize(grasps[best].scores.robust));
    }
  }
  // the fixture must exercise both covered and uncovered points
  CHECK(covered > 50);
  CHECK(covered < 1950);
}

TEST_CASE("annotation is invariant under grasp reordering") {
  const GripperGeometry gripper;
  Rng rng(71);
  PointCloud cloud;
  for (int i = 0; i < 500; ++i) {
    cloud.points.emplace_back(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                              rng.uniform(-0.1, 0.1));
  }
  std::vector<GraspCandidate> grasps;
  for (int g = 0; g < 20; ++g) {
    const Vec3 t(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08));
    // distinct scores, so the tie-break never fires
    grasps.push_back(candidate(identity_frame_at(t), 0.6 + 0.25 * g));
  }
  const auto base = annotate_scene(cloud, grasps, gripper);

  std::vector<GraspCandidate> shuffled = grasps;
  rng.shuffle(shuffled);
  const auto redo = annotate_scene(cloud, shuffled, gripper);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& a = base.annotations[i];
    const auto& b = redo.annotations[i];
    CHECK(a.grasp.has_value() == b.grasp.has_value());
    CHECK(a.score_level == b.score_level);
    if (a.grasp && b.grasp) {
      CHECK(a.grasp->scores.robust == b.grasp->scores.robust);
      CHECK(a.grasp->frame.origin() == b.grasp->frame.origin());
    }
  }
}

namespace {

// index-coded positions so sampled entries can be traced back
AnnotatedScene synthetic_scene(int total, int viable) {
  AnnotatedScene scene;
  scene.table_height = 0.25;
  scene.manifest = "scene_000.json";
  const auto grasp = candidate(identity_frame_at(Vec3(0.0, 0.0, 0.1)), 2.5);
  for (int i = 0; i < total; ++i) {
    scene.view_cloud.points.emplace_back(static_cast<double>(i), 0.0, 0.0);
    scene.view_cloud.normals.emplace_back(Vec3(0.0, 0.0, 1.0));
    PointAnnotation a;
    if (i < viable) {
      a.grasp = grasp;
      a.score_level = 3;
    }
    scene.annotations.push_back(a);
  }
  return scene;
}

int traced_index(const DatasetEntry& e) { return static_cast<int>(std::lround(e.position[0])); }

}  // namespace

TEST_CASE("sampling draws exactly one eighth from the annotated points") {
  const auto scene = synthetic_scene(30000, 5000);
  const auto record = sample_training_points(scene, 25600, 99);

  REQUIRE(record.points.size() == 25600);
  CHECK_FALSE(record.all_random);
  CHECK(record.seed == 99);
  CHECK(record.table_height == 0.25f);
  CHECK(record.manifest == "scene_000.json");

  std::set<int> viable_idx, other_idx;
  int viable_count = 0;
  for (const DatasetEntry& e : record.points) {
    const int idx = traced_index(e);
    if (e.viable) {
      ++viable_count;
      CHECK(e.score_level == 3);
      CHECK(idx < 5000);
      viable_idx.insert(idx);
    } else {
      CHECK(e.score_level == 0);
      CHECK(idx >= 5000);
      CHECK(idx < 30000);
      other_idx.insert(idx);
    }
  }
  CHECK(viable_count == 3200);  // floor(25600 / 8), exact
  // both pools were large enough: no index drawn twice
  CHECK(viable_idx.size() == 3200);
  CHECK(other_idx.size() == 22400);
}

TEST_CASE("scarce annotated points are reused to fill the quota") {
  const auto scene = synthetic_scene(4000, 10);
  const auto record = sample_training_points(scene, 800, 7);

  REQUIRE(record.points.size() == 800);
  std::set<int> viable_idx;
  int viable_count = 0;
  for (const DatasetEntry& e : record.points) {
    if (e.viable) {
      ++viable_count;
      viable_idx.insert(traced_index(e));
    }
  }
  CHECK(viable_count == 100);  // quota met by replacement
  CHECK(viable_idx.size() <= 10);
  for (int idx : viable_idx) CHECK(idx < 10);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto scene = synthetic_scene(2000, 300);
  const auto a = sample_training_points(scene, 1024, 5);
  const auto b = sample_training_points(scene, 1024, 5);
  const auto c = sample_training_points(scene, 1024, 6);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("a scene with no viable points samples everywhere and records it") {
  const auto scene = synthetic_scene(600, 0);
  const auto record = sample_training_points(scene, 256, 12);
  CHECK(record.all_random);
  REQUIRE(record.points.size() == 256);
  for (const DatasetEntry& e : record.points) {
    CHECK(e.viable == 0);
    CHECK(e.score_level == 0);
  }
}

TEST_CASE("sampling rejects tiny requests and empty scenes") {
  const auto scene = synthetic_scene(100, 10);
  CHECK_THROWS_AS(sample_training_points(scene, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_training_points(AnnotatedScene{}, 64, 1), std::invalid_argument);
}

TEST_CASE("sampled grasp poses carry the annotation's frame and scores") {
  AnnotatedScene scene;
  scene.table_height = 0.1;
  const RotationMatrix rot = RotationMatrix::about_axis(Vec3(0, 0, 1), 0.5);
  GraspCandidate grasp;
  grasp.frame = {RigidTransform{rot, Vec3(0.01, -0.02, 0.35)}};
  grasp.scores = {0.75, 3.0, true, 1.75};
  for (int i = 0; i < 16; ++i) {
    scene.view_cloud.points.emplace_back(i, 0.0, 0.0);
    PointAnnotation a;
    a.grasp = grasp;
    a.score_level = 1;
    scene.annotations.push_back(a);
  }
  const auto record = sample_training_points(scene, 8, 3);
  for (const DatasetEntry& e : record.points) {
    if (!e.viable) continue;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        CHECK(e.pose[3 * r + c] == static_cast<float>(rot.matrix()(r, c)));
    CHECK(e.pose[9] == 0.01f);
    CHECK(e.pose[10] == -0.02f);
    CHECK(e.pose[11] == 0.35f);
    CHECK(e.scores[0] == 0.75f);
    CHECK(e.scores[1] == 3.0f);
    CHECK(e.scores[2] == 1.0f);
    CHECK(e.scores[3] == 1.75f);
  }
}

TEST_CASE("dataset files round-trip bit-exactly") {
  const ScoreQuantizer quantizer;
  Rng rng(404);

  SUBCASE("empty list") {
    const auto path = scratch_file("empty.ds");
    write_dataset({}, path, quantizer);
    const auto back = read_dataset(path);
    CHECK(back.empty());
    CHECK(std::filesystem::exists(scratch_file("empty.ds.json")));
  }

  SUBCASE("one record") {
    DatasetRecord rec;
    rec.seed = 0xdeadbeefULL;
    rec.all_random = true;
    rec.table_height = 0.3f;
    rec.manifest = "scenes/a.json";
    for (int i = 0; i < 17; ++i) rec.points.push_back(make_entry(rng, quantizer.levels()));
    const auto path = scratch_file("one.ds");
    write_dataset({rec}, path, quantizer);
    const auto back = read_dataset(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == rec);
  }

  SUBCASE("one hundred records") {
    std::vector<DatasetRecord> records;
    for (int r = 0; r < 100; ++r) {
      DatasetRecord rec;
      rec.seed = 1000 + r;
      rec.table_height = 0.01f * r;
      rec.manifest = "scenes/scene_" + std::to_string(r) + ".json";
      for (int i = 0; i < 7; ++i) rec.points.push_back(make_entry(rng, quantizer.levels()));
      records.push_back(rec);
    }
    const auto path = scratch_file("hundred.ds");
    write_dataset(records, path, quantizer);
    const auto back = read_dataset(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t r = 0; r < records.size(); ++r) CHECK(back[r] == records[r]);

    // second write of the same data produces identical bytes
    const auto path2 = scratch_file("hundred2.ds");
    write_dataset(records, path2, quantizer);
    CHECK(read_bytes(path) == read_bytes(path2));
  }
}

TEST_CASE("sidecar lists boundaries and scene manifests") {
  const ScoreQuantizer quantizer{{0.4, 1.0}};
  std::vector<DatasetRecord> records(3);
  for (int r = 0; r < 3; ++r) {
    records[r].manifest = "m" + std::to_string(r) + ".json";
    records[r].points.resize(4);
  }
  const auto path = scratch_file("sidecar.ds");
  write_dataset(records, path, quantizer);

  const std::string side = read_bytes(scratch_file("sidecar.ds.json"));
  CHECK(side.find("\"m0.json\"") != std::string::npos);
  CHECK(side.find("\"m2.json\"") != std::string::npos);
  CHECK(side.find("0.4") != std::string::npos);
  CHECK(side.find("\"points_per_record\": 4") != std::string::npos);
}

TEST_CASE("truncated dataset files fail with a truncation error") {
  const ScoreQuantizer quantizer;
  Rng rng(88);
  std::vector<DatasetRecord> records;
  for (int r = 0; r < 100; ++r) {
    DatasetRecord rec;
    rec.seed = r;
    rec.manifest = "s.json";
    for (int i = 0; i < 5; ++i) rec.points.push_back(make_entry(rng, quantizer.levels()));
    records.push_back(rec);
  }
  const auto path = scratch_file("trunc.ds");
  write_dataset(records, path, quantizer);
  const std::string bytes = read_bytes(path);

  const auto clipped = scratch_file("trunc_clip.ds");
  write_bytes(clipped, bytes.substr(0, bytes.size() - 1));
  try {
    read_dataset(clipped);
    FAIL("expected a truncation error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }

  // clipping mid-header fails the same way
  const auto header_clip = scratch_file("trunc_header.ds");
  write_bytes(header_clip, bytes.substr(0, 10));
  CHECK_THROWS_AS(read_dataset(header_clip), std::runtime_error);
}

TEST_CASE("foreign and future files are rejected") {
  const ScoreQuantizer quantizer;
  DatasetRecord rec;
  rec.points.resize(3);
  const auto path = scratch_file("version.ds");
  write_dataset({rec}, path, quantizer);
  std::string bytes = read_bytes(path);

  SUBCASE("future version") {
    bytes[4] = 2;  // version field follows the 4-byte magic
    const auto patched = scratch_file("version_patched.ds");
    write_bytes(patched, bytes);
    try {
      read_dataset(patched);
      FAIL("expected a version error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    const auto patched = scratch_file("magic_patched.ds");
    write_bytes(patched, bytes);
    try {
      read_dataset(patched);
      FAIL("expected a magic error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }
  SUBCASE("corrupt record length") {
    // lengthen the first record's prefix: parsing overruns into nothing
    bytes[20] = static_cast<char>(static_cast<unsigned char>(bytes[20]) + 1);
    const auto patched = scratch_file("length_patched.ds");
    write_bytes(patched, bytes);
    CHECK_THROWS_AS(read_dataset(patched), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_dataset(scratch_file("no_such_file.ds")), std::runtime_error);
  }
}

TEST_CASE("write_dataset validates record shape") {
  const ScoreQuantizer quantizer;
  DatasetRecord a, b;
  a.points.resize(4);
  b.points.resize(5);
  CHECK_THROWS_AS(write_dataset({a, b}, scratch_file("bad.ds"), quantizer),
                  std::invalid_argument);

  DatasetRecord c;
  DatasetEntry e;
  e.viable = 1;
  e.score_level = 0;  // viable entries must carry a nonzero level
  c.points.push_back(e);
  CHECK_THROWS_AS(write_dataset({c}, scratch_file("bad2.ds"), quantizer), std::runtime_error);

  DatasetRecord d;
  DatasetEntry e2;
  e2.viable = 1;
  e2.score_level = 9;  // beyond the quantizer's level count
  d.points.push_back(e2);
  CHECK_THROWS_AS(write_dataset({d}, scratch_file("bad3.ds"), quantizer), std::runtime_error);
}

TEST_CASE("annotate, sample, and serialize compose end to end") {
  const GripperGeometry gripper;
  Rng rng(555);
  PointCloud cloud;
  for (int i = 0; i < 400; ++i) {
    cloud.points.emplace_back(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                              rng.uniform(-0.06, 0.0));
    cloud.normals.emplace_back(Vec3(0.0, 0.0, 1.0));
  }
  std::vector<GraspCandidate> grasps;
  grasps.push_back(candidate(identity_frame_at(Vec3::Zero()), 4.5));
  grasps.push_back(candidate(identity_frame_at(Vec3(0.03, 0.0, 0.0)), 1.2));

  auto annotated = annotate_scene(cloud, grasps, gripper);
  annotated.manifest = "fixture.json";
  annotated.table_height = 0.0;

  const auto record = sample_training_points(annotated, 64, 21);
  REQUIRE(record.points.size() == 64);
  int viable = 0;
  for (const DatasetEntry& e : record.points) viable += e.viable;
  CHECK(viable == 8);

  const auto path = scratch_file("pipeline.ds");
  write_dataset({record}, path);
  const auto back = read_dataset(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == record);
}
