#include "graspsynth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "graspsynth/io.hpp"
#include "graspsynth/rng.hpp"

namespace graspsynth {

namespace {

using json = nlohmann::json;

constexpr double kPenetrationLimit = 0.001;
// Fixed off-axis direction for parity ray tests; avoids grazing the
// axis-aligned faces of the primitive meshes.
const Vec3 kParityDir = Vec3(0.577350, 0.332574, 0.742922).normalized();

void push_quad(TriangleMesh& m, int a, int b, int c, int d) {
  m.triangles.push_back({a, b, c});
  m.triangles.push_back({a, c, d});
}

Vec3 world_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  return (b - a).cross(c - a).normalized();
}

// --- support-polygon machinery -------------------------------------------

// Andrew monotone chain; returns the hull in counter-clockwise order.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Distance of p inside the hull (negative outside); the minimum signed
// distance to the edges of a CCW polygon.
double hull_inner_margin(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p) {
  if (hull.size() < 3) return -1.0;
  double margin = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d& a = hull[i];
    const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d e = b - a;
    const double len = e.norm();
    if (len < 1e-12) continue;
    const double signed_dist = (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x())) / len;
    margin = std::min(margin, signed_dist);
  }
  return margin;
}

std::vector<RotationMatrix> stable_orientations_with_margin(const TriangleMesh& mesh,
                                                            double margin) {
  const Vec3 com = mesh_center_of_mass(mesh);
  constexpr double kPlaneTol = 1e-7;

  struct PlaneGroup {
    Vec3 n;
    double d = 0.0;
    std::vector<int> verts;
  };
  std::vector<PlaneGroup> groups;

  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const Vec3 n = world_normal(a, b, c);
    const double d = n.dot(a);
    bool hull_face = true;
    for (const Vec3& v : mesh.vertices) {
      if (n.dot(v) > d + kPlaneTol) {
        hull_face = false;
        break;
      }
    }
    if (!hull_face) continue;
    PlaneGroup* group = nullptr;
    for (PlaneGroup& g : groups) {
      if (g.n.dot(n) > 1.0 - 1e-9 && std::abs(g.d - d) <= kPlaneTol) {
        group = &g;
        break;
      }
    }
    if (!group) {
      groups.push_back({n, d, {}});
      group = &groups.back();
    }
    for (int v : tri) group->verts.push_back(v);
  }

  std::vector<RotationMatrix> orientations;
  for (const PlaneGroup& g : groups) {
    // in-plane basis
    const Vec3 e1 = (std::abs(g.n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0))
                        .cross(g.n)
                        .normalized();
    const Vec3 e2 = g.n.cross(e1);
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(g.verts.size());
    for (int v : g.verts)
      pts.emplace_back(e1.dot(mesh.vertices[v]), e2.dot(mesh.vertices[v]));
    const auto hull = convex_hull_2d(std::move(pts));
    const Eigen::Vector2d com2(e1.dot(com), e2.dot(com));
    if (hull_inner_margin(hull, com2) >= margin)
      orientations.push_back(RotationMatrix::between(g.n, Vec3(0, 0, -1)));
  }
  return orientations;
}

// --- drop & interpenetration ---------------------------------------------

bool point_inside_mesh(const TriangleMesh& mesh, const RigidTransform& pose, const Vec3& p) {
  // parity test in object coordinates
  const RigidTransform inv = pose.inverse();
  const Vec3 q = inv.apply(p);
  const Vec3 dir = inv.rotate(kParityDir);
  int crossings = 0;
  for (const auto& tri : mesh.triangles) {
    if (ray_triangle(q, dir, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]))
      ++crossings;
  }
  return (crossings % 2) == 1;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + (d1 / (d1 - d3)) * ab)).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + (d2 / (d2 - d6)) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const Vec3 proj = a + ab * (vb * denom) + ac * (vc * denom);
  return (p - proj).norm();
}

double point_mesh_distance(const TriangleMesh& mesh, const RigidTransform& pose, const Vec3& p) {
  const Vec3 q = pose.inverse().apply(p);
  double best = std::numeric_limits<double>::max();
  for (const auto& tri : mesh.triangles) {
    best = std::min(best, point_triangle_distance(q, mesh.vertices[tri[0]],
                                                  mesh.vertices[tri[1]], mesh.vertices[tri[2]]));
  }
  return best;
}

std::vector<Vec3> surface_probes(const TriangleMesh& mesh, const RigidTransform& pose) {
  std::vector<Vec3> probes;
  probes.reserve(mesh.vertices.size() + mesh.triangles.size());
  for (const Vec3& v : mesh.vertices) probes.push_back(pose.apply(v));
  for (const auto& tri : mesh.triangles) {
    probes.push_back(pose.apply(
        (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0));
  }
  return probes;
}

bool meshes_interpenetrate(const TriangleMesh& a, const RigidTransform& pa, const TriangleMesh& b,
                           const RigidTransform& pb) {
  for (const Vec3& p : surface_probes(a, pa)) {
    if (point_inside_mesh(b, pb, p) && point_mesh_distance(b, pb, p) > kPenetrationLimit)
      return true;
  }
  for (const Vec3& p : surface_probes(b, pb)) {
    if (point_inside_mesh(a, pa, p) && point_mesh_distance(a, pa, p) > kPenetrationLimit)
      return true;
  }
  return false;
}

TriangleMesh table_mesh(double table_height) {
  const double e = 0.5 * kTableSize;
  TriangleMesh m;
  m.vertices = {{-e, -e, table_height}, {e, -e, table_height}, {e, e, table_height},
                {-e, e, table_height}};
  push_quad(m, 0, 1, 2, 3);
  return m;
}

std::vector<std::pair<const TriangleMesh*, RigidTransform>> scene_instances(
    const Scene& scene, const std::vector<ObjectModel>& models) {
  std::vector<std::pair<const TriangleMesh*, RigidTransform>> instances;
  instances.reserve(scene.objects.size());
  for (const PlacedObject& obj : scene.objects)
    instances.emplace_back(&find_model(models, obj.id).mesh, obj.pose);
  return instances;
}

}  // namespace

// --- primitives ----------------------------------------------------------

TriangleMesh make_box(double sx, double sy, double sz) {
  const double x = 0.5 * sx, y = 0.5 * sy, z = 0.5 * sz;
  TriangleMesh m;
  m.vertices = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
  push_quad(m, 0, 3, 2, 1);  // bottom, -z
  push_quad(m, 4, 5, 6, 7);  // top, +z
  push_quad(m, 0, 1, 5, 4);  // -y
  push_quad(m, 2, 3, 7, 6);  // +y
  push_quad(m, 0, 4, 7, 3);  // -x
  push_quad(m, 1, 2, 6, 5);  // +x
  m.validate();
  return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  if (segments < 3) throw std::invalid_argument("make_cylinder: segments < 3");
  TriangleMesh m;
  const double z = 0.5 * height;
  for (int k = 0; k < segments; ++k) {
    const double th = 2.0 * M_PI * k / segments;
    m.vertices.emplace_back(radius * std::cos(th), radius * std::sin(th), -z);
  }
  for (int k = 0; k < segments; ++k) {
    const double th = 2.0 * M_PI * k / segments;
    m.vertices.emplace_back(radius * std::cos(th), radius * std::sin(th), z);
  }
  const int cb = 2 * segments, ct = 2 * segments + 1;
  m.vertices.emplace_back(0.0, 0.0, -z);
  m.vertices.emplace_back(0.0, 0.0, z);
  for (int k = 0; k < segments; ++k) {
    const int k1 = (k + 1) % segments;
    m.triangles.push_back({k, k1, segments + k1});
    m.triangles.push_back({k, segments + k1, segments + k});
    m.triangles.push_back({cb, k1, k});
    m.triangles.push_back({ct, segments + k, segments + k1});
  }
  m.validate();
  return m;
}

TriangleMesh make_wedge(double sx, double sy, double sz) {
  const double x = 0.5 * sx, y = 0.5 * sy, z = 0.5 * sz;
  TriangleMesh m;
  m.vertices = {{-x, -y, -z}, {x, -y, -z}, {-x, -y, z},
                {-x, y, -z},  {x, y, -z},  {-x, y, z}};
  m.triangles.push_back({0, 1, 2});  // -y
  m.triangles.push_back({3, 5, 4});  // +y
  push_quad(m, 0, 3, 4, 1);          // bottom
  push_quad(m, 0, 2, 5, 3);          // -x
  push_quad(m, 1, 4, 5, 2);          // slant
  m.validate();
  return m;
}

// --- models --------------------------------------------------------------

Vec3 mesh_center_of_mass(const TriangleMesh& mesh) {
  double volume = 0.0;
  Vec3 weighted = Vec3::Zero();
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double v = a.dot(b.cross(c)) / 6.0;
    volume += v;
    weighted += v * (a + b + c) / 4.0;
  }
  if (std::abs(volume) < 1e-12) {
    Vec3 mean = Vec3::Zero();
    for (const Vec3& v : mesh.vertices) mean += v;
    return mean / static_cast<double>(mesh.vertices.size());
  }
  return weighted / volume;
}

std::vector<RotationMatrix> stable_orientations(const TriangleMesh& mesh) {
  mesh.validate();
  auto orientations = stable_orientations_with_margin(mesh, 1e-6);
  if (orientations.empty()) orientations = stable_orientations_with_margin(mesh, 0.0);
  if (orientations.empty()) throw std::runtime_error("mesh has no stable resting orientation");
  return orientations;
}

ObjectModel make_object(std::string id, TriangleMesh mesh) {
  ObjectModel model;
  model.stable_orientations = stable_orientations(mesh);
  model.id = std::move(id);
  model.mesh = std::move(mesh);
  return model;
}

const ObjectModel& find_model(const std::vector<ObjectModel>& models, const std::string& id) {
  for (const ObjectModel& m : models) {
    if (m.id == id) return m;
  }
  throw std::runtime_error("unknown object model: " + id);
}

// --- settling ------------------------------------------------------------

RigidTransform drop_pose(const TriangleMesh& mesh, const RotationMatrix& orientation, double x,
                         double y,
                         const std::vector<std::pair<const TriangleMesh*, RigidTransform>>& support,
                         double table_height) {
  double z_min = std::numeric_limits<double>::max();
  for (const Vec3& v : mesh.vertices) z_min = std::min(z_min, (orientation * v).z());
  const double start_z = table_height + 1.0;
  const RigidTransform start{orientation, Vec3(x, y, start_z - z_min)};

  const MeshBvh support_bvh(support);
  const UnitVec3 down(Vec3(0, 0, -1));
  const UnitVec3 up(Vec3(0, 0, 1));

  // First contact while descending. The table bound needs only the falling
  // vertices (a triangle's minimum height is at a vertex); mesh-on-mesh
  // contact casts rays both ways from vertices and face centroids so that
  // face-on-face landings are caught even when no vertex overlaps.
  double descent = std::numeric_limits<double>::max();
  for (const Vec3& v : mesh.vertices)
    descent = std::min(descent, start.apply(v).z() - table_height);
  if (!support.empty()) {
    for (const Vec3& w : surface_probes(mesh, start)) {
      if (auto hit = support_bvh.raycast(w, down)) descent = std::min(descent, hit->distance);
    }
    const MeshBvh falling_bvh({{&mesh, start}});
    for (const auto& [other, pose] : support) {
      for (const Vec3& w : surface_probes(*other, pose)) {
        if (auto hit = falling_bvh.raycast(w, up)) descent = std::min(descent, hit->distance);
      }
    }
  }
  return {orientation, Vec3(x, y, start.translation.z() - descent)};
}

Scene settle_scene(const std::vector<ObjectModel>& models, int count, std::uint64_t seed,
                   const SettleParams& params) {
  if (models.empty()) throw std::invalid_argument("settle_scene: no models");
  if (count < 1 || count > 15) throw std::invalid_argument("settle_scene: count must be in 1..15");

  Rng rng(seed);
  Scene scene;
  scene.table_height = params.table_height;
  std::vector<std::pair<const TriangleMesh*, RigidTransform>> placed;

  for (int slot = 0; slot < count; ++slot) {
    const ObjectModel& model = models[rng.uniform_index(models.size())];
    bool ok = false;
    for (int attempt = 0; attempt < params.max_attempts && !ok; ++attempt) {
      const RotationMatrix& rest =
          model.stable_orientations[rng.uniform_index(model.stable_orientations.size())];
      const RotationMatrix spin =
          RotationMatrix::about_axis(Vec3(0, 0, 1), rng.uniform(0.0, 2.0 * M_PI));
      const RotationMatrix orientation = spin * rest;
      const double half = 0.5 * params.drop_extent;
      const double x = rng.uniform(-half, half);
      const double y = rng.uniform(-half, half);
      const RigidTransform pose =
          drop_pose(model.mesh, orientation, x, y, placed, params.table_height);

      // reject perches that leave the object unreasonably high (tall stacks)
      double lowest = std::numeric_limits<double>::max();
      for (const Vec3& v : model.mesh.vertices) lowest = std::min(lowest, pose.apply(v).z());
      if (lowest > params.table_height + 0.5) continue;

      bool collides = false;
      for (const auto& [other, other_pose] : placed) {
        if (meshes_interpenetrate(model.mesh, pose, *other, other_pose)) {
          collides = true;
          break;
        }
      }
      if (!collides) {
        scene.objects.push_back({model.id, pose});
        placed.emplace_back(&model.mesh, pose);
        ok = true;
      }
    }
    if (!ok)
      throw std::runtime_error("settle_scene: could not place object '" + model.id + "' after " +
                               std::to_string(params.max_attempts) + " attempts");
  }
  return scene;
}

// --- camera & rendering --------------------------------------------------

void DepthCamera::validate() const {
  if (!(fx > 0.0 && fy > 0.0 && cx > 0.0 && cy > 0.0))
    throw std::invalid_argument("camera intrinsics must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("camera resolution must be >= 1x1");
}

DepthCamera default_camera(double table_height) {
  DepthCamera c;
  c.width = 320;
  c.height = 240;
  c.fy = 0.5 * c.height / std::tan(0.5 * M_PI / 3.0);  // 60 degree vertical FOV
  c.fx = c.fy;
  c.cx = 0.5 * c.width;
  c.cy = 0.5 * c.height;
  const double s = std::sqrt(0.5);  // 45 degree pitch
  Mat3 r;
  r.col(0) = Vec3(1, 0, 0);    // image x: world +x
  r.col(1) = Vec3(0, -s, -s);  // image y: down and toward the table
  r.col(2) = Vec3(0, s, -s);   // optical axis
  c.pose = {RotationMatrix::from_matrix_unchecked(r), Vec3(0, -0.6, table_height + 0.8)};
  return c;
}

PointCloud render_view_cloud(const Scene& scene, const std::vector<ObjectModel>& models,
                             const DepthCamera& camera, std::vector<int>* labels) {
  camera.validate();
  auto instances = scene_instances(scene, models);
  const TriangleMesh table = table_mesh(scene.table_height);
  const int table_instance = static_cast<int>(instances.size());
  instances.emplace_back(&table, RigidTransform::identity());
  const MeshBvh bvh(instances);

  PointCloud cloud;
  if (labels) labels->clear();
  const Vec3 origin = camera.pose.translation;
  for (int v = 0; v < camera.height; ++v) {
    for (int u = 0; u < camera.width; ++u) {
      const Vec3 dir_cam((u + 0.5 - camera.cx) / camera.fx, (v + 0.5 - camera.cy) / camera.fy,
                         1.0);
      const UnitVec3 dir(camera.pose.rotate(dir_cam));
      if (auto hit = bvh.raycast(origin, dir)) {
        cloud.points.push_back(hit->point);
        if (labels) labels->push_back(hit->instance == table_instance ? -1 : hit->instance);
      }
    }
  }
  return cloud;
}

PointCloud apply_depth_noise(const PointCloud& cloud, const Vec3& camera_origin,
                             const NoiseModel& noise, std::uint64_t seed) {
  if (noise.sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  PointCloud out = cloud;
  Rng rng(seed);
  for (Vec3& p : out.points) {
    const double eps = rng.normal(0.0, noise.sigma);
    p = p + eps * (p - camera_origin);
  }
  return out;
}

PointCloud assemble_scene_cloud(const Scene& scene, const std::vector<ObjectModel>& models,
                                double samples_per_m2, std::uint64_t seed,
                                std::vector<int>* labels) {
  if (!(samples_per_m2 > 0.0))
    throw std::invalid_argument("assemble_scene_cloud: samples_per_m2 must be > 0");

  struct WorldTri {
    Vec3 a, b, c;
    UnitVec3 n;
    int label;
  };
  std::vector<WorldTri> tris;
  std::vector<double> cumulative;
  double total_area = 0.0;

  auto add_mesh = [&](const TriangleMesh& mesh, const RigidTransform& pose, int label) {
    for (const auto& tri : mesh.triangles) {
      WorldTri w;
      w.a = pose.apply(mesh.vertices[tri[0]]);
      w.b = pose.apply(mesh.vertices[tri[1]]);
      w.c = pose.apply(mesh.vertices[tri[2]]);
      w.n = UnitVec3((w.b - w.a).cross(w.c - w.a));
      w.label = label;
      tris.push_back(w);
      total_area += 0.5 * (w.b - w.a).cross(w.c - w.a).norm();
      cumulative.push_back(total_area);
    }
  };
  for (std::size_t k = 0; k < scene.objects.size(); ++k)
    add_mesh(find_model(models, scene.objects[k].id).mesh, scene.objects[k].pose,
             static_cast<int>(k));
  const TriangleMesh table = table_mesh(scene.table_height);
  add_mesh(table, RigidTransform::identity(), -1);

  const auto count = static_cast<std::size_t>(std::llround(total_area * samples_per_m2));
  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.normals.reserve(count);
  if (labels) {
    labels->clear();
    labels->reserve(count);
  }
  Rng rng(seed);
  for (std::size_t s = 0; s < count; ++s) {
    const double r = rng.uniform(0.0, total_area);
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    const WorldTri& t = tris[std::min<std::size_t>(it - cumulative.begin(), tris.size() - 1)];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    cloud.points.push_back(t.a + u * (t.b - t.a) + v * (t.c - t.a));
    cloud.normals.push_back(t.n);
    if (labels) labels->push_back(t.label);
  }
  return cloud;
}

// --- manifests -----------------------------------------------------------

namespace {
json pose_json(const RigidTransform& pose) {
  const auto f = pose_to_floats(pose);
  return json(std::vector<double>(f.begin(), f.end()));
}

RigidTransform pose_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 12) throw std::runtime_error("pose must have 12 floats");
  std::array<double, 12> f;
  std::copy(v.begin(), v.end(), f.begin());
  return pose_from_floats(f);
}
}  // namespace

void write_scene_record(const std::string& path, const SceneRecord& record) {
  json j;
  j["table_height"] = record.scene.table_height;
  j["objects"] = json::array();
  for (const PlacedObject& obj : record.scene.objects)
    j["objects"].push_back({{"id", obj.id}, {"pose", pose_json(obj.pose)}});
  j["camera"] = {{"pose", pose_json(record.camera.pose)}, {"fx", record.camera.fx},
                 {"fy", record.camera.fy},                {"cx", record.camera.cx},
                 {"cy", record.camera.cy},                {"width", record.camera.width},
                 {"height", record.camera.height}};
  j["sigma"] = record.sigma;
  j["seed"] = record.seed;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene manifest: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

SceneRecord read_scene_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene manifest: " + path);
  json j;
  in >> j;
  SceneRecord record;
  record.scene.table_height = j.at("table_height").get<double>();
  for (const json& obj : j.at("objects")) {
    record.scene.objects.push_back(
        {obj.at("id").get<std::string>(), pose_from_json(obj.at("pose"))});
  }
  const json& cam = j.at("camera");
  record.camera.pose = pose_from_json(cam.at("pose"));
  record.camera.fx = cam.at("fx").get<double>();
  record.camera.fy = cam.at("fy").get<double>();
  record.camera.cx = cam.at("cx").get<double>();
  record.camera.cy = cam.at("cy").get<double>();
  record.camera.width = cam.at("width").get<int>();
  record.camera.height = cam.at("height").get<int>();
  record.camera.validate();
  record.sigma = j.at("sigma").get<double>();
  record.seed = j.at("seed").get<std::uint64_t>();
  return record;
}

}  // namespace graspsynth
