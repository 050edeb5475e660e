#include "graspsynth/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "binary_io.hpp"
#include "graspsynth/bvh.hpp"
#include "graspsynth/rng.hpp"

namespace graspsynth {

namespace {

using binio::put_f32;
using binio::put_u32;
using binio::put_u64;
using binio::put_u8;
using binio::Reader;

constexpr char kMagic[4] = {'G', 'S', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

void append_entry(std::string& buf, const DatasetEntry& e) {
  for (float f : e.position) put_f32(buf, f);
  for (float f : e.normal) put_f32(buf, f);
  put_u8(buf, e.viable);
  put_u8(buf, e.score_level);
  for (float f : e.pose) put_f32(buf, f);
  for (float f : e.scores) put_f32(buf, f);
}

DatasetEntry parse_entry(Reader& r) {
  DatasetEntry e;
  for (float& f : e.position) f = r.f32();
  for (float& f : e.normal) f = r.f32();
  e.viable = r.u8();
  e.score_level = r.u8();
  for (float& f : e.pose) f = r.f32();
  for (float& f : e.scores) f = r.f32();
  return e;
}

void check_entry(const DatasetEntry& e, int levels, const char* context) {
  if (e.viable > 1) throw std::runtime_error(std::string(context) + ": bad viability flag");
  if (e.score_level >= levels)
    throw std::runtime_error(std::string(context) + ": score level out of range");
  if ((e.viable == 1) != (e.score_level > 0))
    throw std::runtime_error(std::string(context) +
                             ": viability flag inconsistent with score level");
}

// k indices from pool: a partial Fisher-Yates draw when the pool suffices,
// independent draws with replacement when it does not.
std::vector<int> draw_from_pool(Rng& rng, const std::vector<int>& pool, int k) {
  std::vector<int> out;
  out.reserve(k);
  if (static_cast<int>(pool.size()) >= k) {
    std::vector<int> tmp = pool;
    for (int i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_index(tmp.size() - i);
      std::swap(tmp[i], tmp[j]);
      out.push_back(tmp[i]);
    }
  } else {
    for (int i = 0; i < k; ++i) out.push_back(pool[rng.uniform_index(pool.size())]);
  }
  return out;
}

}  // namespace

void ScoreQuantizer::validate() const {
  if (boundaries.empty())
    throw std::invalid_argument("quantizer needs at least one boundary");
  for (double b : boundaries) {
    if (!std::isfinite(b)) throw std::invalid_argument("quantizer boundaries must be finite");
  }
  if (boundaries.front() <= 0.0)
    throw std::invalid_argument("first boundary must be positive: level 0 is the no-grasp level");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1])
      throw std::invalid_argument("quantizer boundaries must be strictly ascending");
  }
}

int ScoreQuantizer::quantize(double s) const {
  validate();
  if (!(s >= 0.0)) throw std::invalid_argument("quantize: score must be nonnegative");
  return static_cast<int>(std::upper_bound(boundaries.begin(), boundaries.end(), s) -
                          boundaries.begin());
}

AnnotatedScene annotate_scene(const PointCloud& view_cloud,
                              const std::vector<GraspCandidate>& grasps,
                              const GripperGeometry& gripper, const ScoreQuantizer& quantizer) {
  quantizer.validate();
  gripper.validate();
  AnnotatedScene out;
  out.view_cloud = view_cloud;
  out.annotations.assign(view_cloud.size(), PointAnnotation{});
  if (view_cloud.empty()) return out;

  const PointBvh index(view_cloud.points);
  for (std::size_t g = 0; g < grasps.size(); ++g) {
    const GraspCandidate& cand = grasps[g];
    const int level = quantizer.quantize(cand.scores.robust);
    if (level == 0) continue;
    for (int idx : closing_region_points(view_cloud, index, cand.frame, gripper)) {
      PointAnnotation& a = out.annotations[idx];
      if (!a.grasp || cand.scores.robust > a.grasp->scores.robust) {
        a.grasp = cand;
        a.score_level = level;
      }
    }
  }
  return out;
}

DatasetRecord sample_training_points(const AnnotatedScene& scene, int n, std::uint64_t seed) {
  if (n < 8) throw std::invalid_argument("sample_training_points: need n >= 8");
  if (scene.view_cloud.empty()) throw std::invalid_argument("sample_training_points: empty scene");
  if (scene.annotations.size() != scene.view_cloud.size())
    throw std::invalid_argument("sample_training_points: annotation count mismatch");

  std::vector<int> viable, rest;
  for (std::size_t i = 0; i < scene.annotations.size(); ++i) {
    (scene.annotations[i].grasp ? viable : rest).push_back(static_cast<int>(i));
  }

  Rng rng(seed);
  std::vector<int> chosen;
  DatasetRecord record;
  if (viable.empty()) {
    std::vector<int> all(scene.view_cloud.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    chosen = draw_from_pool(rng, all, n);
    record.all_random = true;
  } else {
    const int k = n / 8;
    chosen = draw_from_pool(rng, viable, k);
    // A cloud where every point is annotated has no "rest" pool; the
    // remaining slots then come from the full cloud.
    std::vector<int> fill = rest;
    if (fill.empty()) {
      fill.resize(scene.view_cloud.size());
      for (std::size_t i = 0; i < fill.size(); ++i) fill[i] = static_cast<int>(i);
    }
    const std::vector<int> others = draw_from_pool(rng, fill, n - k);
    chosen.insert(chosen.end(), others.begin(), others.end());
  }
  rng.shuffle(chosen);

  record.seed = seed;
  record.table_height = static_cast<float>(scene.table_height);
  record.manifest = scene.manifest;
  record.points.reserve(n);
  const bool have_normals = scene.view_cloud.has_normals();
  for (int idx : chosen) {
    DatasetEntry e;
    const Vec3& p = scene.view_cloud.points[idx];
    for (int k = 0; k < 3; ++k) e.position[k] = static_cast<float>(p[k]);
    if (have_normals) {
      const Vec3& nrm = scene.view_cloud.normals[idx].vec();
      for (int k = 0; k < 3; ++k) e.normal[k] = static_cast<float>(nrm[k]);
    }
    const PointAnnotation& a = scene.annotations[idx];
    if (a.grasp) {
      e.viable = 1;
      e.score_level = static_cast<std::uint8_t>(a.score_level);
      const Mat3& rot = a.grasp->frame.pose.rotation.matrix();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) e.pose[3 * r + c] = static_cast<float>(rot(r, c));
      for (int k = 0; k < 3; ++k)
        e.pose[9 + k] = static_cast<float>(a.grasp->frame.pose.translation[k]);
      const GraspScores& s = a.grasp->scores;
      e.scores = {static_cast<float>(s.antipodal), static_cast<float>(s.occupancy),
                  s.collision_free ? 1.0f : 0.0f, static_cast<float>(s.robust)};
    }
    record.points.push_back(e);
  }
  return record;
}

void write_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path,
                   const ScoreQuantizer& quantizer) {
  quantizer.validate();
  const std::uint64_t n = records.empty() ? 0 : records.front().points.size();
  for (const DatasetRecord& rec : records) {
    if (rec.points.size() != n)
      throw std::invalid_argument("write_dataset: records must share a point count");
    for (const DatasetEntry& e : rec.points) check_entry(e, quantizer.levels(), "write_dataset");
  }

  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u64(buf, n);
  put_u32(buf, static_cast<std::uint32_t>(quantizer.levels()));
  for (const DatasetRecord& rec : records) {
    std::string payload;
    put_u64(payload, rec.seed);
    put_u8(payload, rec.all_random ? 1 : 0);
    put_f32(payload, rec.table_height);
    put_u32(payload, static_cast<std::uint32_t>(rec.manifest.size()));
    payload.append(rec.manifest);
    for (const DatasetEntry& e : rec.points) append_entry(payload, e);
    put_u64(buf, payload.size());
    buf.append(payload);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_dataset: write failed for " + path.string());

  nlohmann::json side;
  side["boundaries"] = quantizer.boundaries;
  side["points_per_record"] = n;
  side["record_count"] = records.size();
  side["scenes"] = nlohmann::json::array();
  for (const DatasetRecord& rec : records) side["scenes"].push_back(rec.manifest);
  std::filesystem::path side_path = path;
  side_path += ".json";
  std::ofstream side_out(side_path);
  if (!side_out) throw std::runtime_error("write_dataset: cannot open " + side_path.string());
  side_out << side.dump(2) << "\n";
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  Reader r{data, "dataset"};
  r.need(4);
  if (std::memcmp(data.data(), kMagic, 4) != 0)
    throw std::runtime_error("read_dataset: not a dataset file (bad magic)");
  r.pos = 4;
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    std::ostringstream msg;
    msg << "read_dataset: version mismatch: file has version " << version << ", reader supports "
        << kVersion;
    throw std::runtime_error(msg.str());
  }
  const std::uint64_t n = r.u64();
  const std::uint32_t levels = r.u32();

  std::vector<DatasetRecord> records;
  while (r.pos < data.size()) {
    const std::uint64_t length = r.u64();
    const std::size_t start = r.pos;
    r.need(length);
    DatasetRecord rec;
    rec.seed = r.u64();
    rec.all_random = r.u8() != 0;
    rec.table_height = r.f32();
    const std::uint32_t manifest_len = r.u32();
    r.need(manifest_len);
    rec.manifest.assign(data, r.pos, manifest_len);
    r.pos += manifest_len;
    rec.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      DatasetEntry e = parse_entry(r);
      check_entry(e, static_cast<int>(levels), "read_dataset");
      rec.points.push_back(e);
    }
    if (r.pos != start + length)
      throw std::runtime_error("read_dataset: record length mismatch");
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace graspsynth
