#include "graspsynth/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace graspsynth {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace {

void put_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

float get_f32(std::istream& is) {
  float v;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  if (cloud.has_normals()) cloud.require_normals();
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(path, "cannot open for writing");
  os << "ply\nformat binary_little_endian 1.0\n";
  os << "element vertex " << cloud.size() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_normals())
    os << "property float nx\nproperty float ny\nproperty float nz\n";
  os << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    put_f32(os, static_cast<float>(p.x()));
    put_f32(os, static_cast<float>(p.y()));
    put_f32(os, static_cast<float>(p.z()));
    if (cloud.has_normals()) {
      const Vec3& n = cloud.normals[i].vec();
      put_f32(os, static_cast<float>(n.x()));
      put_f32(os, static_cast<float>(n.y()));
      put_f32(os, static_cast<float>(n.z()));
    }
  }
  if (!os) fail(path, "write failed");
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open");
  std::string line;
  if (!std::getline(is, line) || line != "ply") fail(path, "not a ply file");
  std::size_t count = 0;
  std::vector<std::string> props;
  bool binary_le = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = (fmt == "binary_little_endian");
    } else if (tok == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") fail(path, "unsupported element: " + name);
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      if (type != "float") fail(path, "unsupported property type: " + type);
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    } else if (tok == "comment" || tok == "obj_info") {
      continue;
    } else {
      fail(path, "unsupported header line: " + line);
    }
  }
  if (!binary_le) fail(path, "expected binary_little_endian format");
  const bool with_normals = props.size() == 6;
  if (!(props == std::vector<std::string>{"x", "y", "z"} ||
        props == std::vector<std::string>{"x", "y", "z", "nx", "ny", "nz"}))
    fail(path, "unsupported property layout");

  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float x = get_f32(is), y = get_f32(is), z = get_f32(is);
    if (!is) fail(path, "truncated vertex data");
    cloud.points.emplace_back(x, y, z);
    if (with_normals) {
      const float nx = get_f32(is), ny = get_f32(is), nz = get_f32(is);
      if (!is) fail(path, "truncated normal data");
      cloud.normals.emplace_back(Vec3(nx, ny, nz));
    }
  }
  return cloud;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(path, "cannot open");
  TriangleMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail(path, "bad vertex at line " + std::to_string(lineno));
      mesh.vertices.emplace_back(x, y, z);
    } else if (tok == "f") {
      std::vector<int> idx;
      std::string ref;
      while (ls >> ref) {
        // "i", "i/t", "i/t/n", "i//n" forms; the vertex index leads
        const std::size_t slash = ref.find('/');
        const int i = std::stoi(slash == std::string::npos ? ref : ref.substr(0, slash));
        // OBJ indices are 1-based; negatives count from the end
        idx.push_back(i > 0 ? i - 1 : static_cast<int>(mesh.vertices.size()) + i);
      }
      if (idx.size() != 3)
        fail(path, "non-triangular face at line " + std::to_string(lineno));
      mesh.triangles.push_back({idx[0], idx[1], idx[2]});
    }
    // other directives (vn, vt, o, g, s, mtllib, usemtl, #) are ignored
  }
  mesh.validate();
  return mesh;
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream os(path);
  if (!os) fail(path, "cannot open for writing");
  os.precision(9);
  for (const Vec3& v : mesh.vertices)
    os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles)
    os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  if (!os) fail(path, "write failed");
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(path, "cannot open for writing");
  const std::uint32_t count = static_cast<std::uint32_t>(labels.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (int v : labels) {
    const std::int32_t x = v;
    os.write(reinterpret_cast<const char*>(&x), sizeof(x));
  }
  if (!os) fail(path, "write failed");
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open");
  std::uint32_t count;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!is) fail(path, "truncated header");
  std::vector<int> labels(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::int32_t x;
    is.read(reinterpret_cast<char*>(&x), sizeof(x));
    if (!is) fail(path, "truncated label data");
    labels[i] = x;
  }
  return labels;
}

std::array<double, 12> pose_to_floats(const RigidTransform& pose) {
  std::array<double, 12> f;
  const Mat3& r = pose.rotation.matrix();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) f[3 * row + col] = r(row, col);
  }
  for (int k = 0; k < 3; ++k) f[9 + k] = pose.translation[k];
  return f;
}

RigidTransform pose_from_floats(const std::array<double, 12>& f) {
  Mat3 r;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = f[3 * row + col];
  }
  return {RotationMatrix::from_matrix(r), Vec3(f[9], f[10], f[11])};
}

void write_grasps_jsonl(const std::filesystem::path& path, const ProposalSet& grasps) {
  std::ofstream os(path);
  if (!os) fail(path, "cannot open for writing");
  for (const GraspCandidate& g : grasps) {
    nlohmann::json j;
    j["pose"] = pose_to_floats(g.frame.pose);
    j["antipodal"] = g.scores.antipodal;
    j["occupancy"] = g.scores.occupancy;
    j["collision_free"] = g.scores.collision_free;
    j["robust"] = g.scores.robust;
    os << j.dump() << "\n";
  }
  if (!os) fail(path, "write failed");
}

ProposalSet read_grasps_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(path, "cannot open");
  ProposalSet grasps;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      GraspCandidate g;
      g.frame.pose = pose_from_floats(j.at("pose").get<std::array<double, 12>>());
      g.scores.antipodal = j.at("antipodal").get<double>();
      g.scores.occupancy = j.at("occupancy").get<double>();
      g.scores.collision_free = j.at("collision_free").get<bool>();
      g.scores.robust = j.at("robust").get<double>();
      grasps.push_back(g);
    } catch (const std::exception& e) {
      fail(path, "bad grasp at line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return grasps;
}

void write_grasp_markers_ply(const std::filesystem::path& path, const ProposalSet& grasps,
                             const GripperGeometry& gripper) {
  std::ofstream os(path);
  if (!os) fail(path, "cannot open for writing");
  const double w = gripper.max_opening / 2.0;
  const double fl = gripper.finger_length;
  const Vec3 outline[6] = {
      {w, 0.0, 0.0},  {w, 0.0, -fl},  // closing-side finger
      {-w, 0.0, 0.0}, {-w, 0.0, -fl},  // opposite finger
      {0.0, 0.0, -fl}, {0.0, 0.0, -fl - gripper.palm_depth},  // approach stub
  };
  const int segments[4][2] = {{0, 1}, {2, 3}, {1, 3}, {4, 5}};
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << 6 * grasps.size() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  os << "element edge " << 4 * grasps.size() << "\n";
  os << "property int vertex1\nproperty int vertex2\n";
  os << "end_header\n";
  os.precision(9);
  for (const GraspCandidate& g : grasps) {
    for (const Vec3& v : outline) {
      const Vec3 p = g.frame.pose.apply(v);
      os << p.x() << " " << p.y() << " " << p.z() << "\n";
    }
  }
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    for (const auto& s : segments)
      os << 6 * i + s[0] << " " << 6 * i + s[1] << "\n";
  }
  if (!os) fail(path, "write failed");
}

}  // namespace graspsynth
