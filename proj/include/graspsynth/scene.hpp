#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graspsynth/bvh.hpp"
#include "graspsynth/geometry.hpp"

namespace graspsynth {

// Side length of the square table patch, meters.
inline constexpr double kTableSize = 0.6;

TriangleMesh make_box(double sx, double sy, double sz);
TriangleMesh make_cylinder(double radius, double height, int segments = 24);
// Right triangular prism: box corner cut along the x-z diagonal.
TriangleMesh make_wedge(double sx, double sy, double sz);

struct ObjectModel {
  std::string id;
  TriangleMesh mesh;
  std::vector<RotationMatrix> stable_orientations;
};

// Resting orientations: one per convex-hull face plane whose support
// polygon contains the projected center of mass. Each rotation turns that
// face's outward normal to -z.
std::vector<RotationMatrix> stable_orientations(const TriangleMesh& mesh);

// Center of mass of the enclosed volume (signed tetrahedron decomposition;
// assumes a closed mesh with outward winding).
Vec3 mesh_center_of_mass(const TriangleMesh& mesh);

ObjectModel make_object(std::string id, TriangleMesh mesh);

const ObjectModel& find_model(const std::vector<ObjectModel>& models, const std::string& id);

struct PlacedObject {
  std::string id;
  RigidTransform pose;
};

struct Scene {
  std::vector<PlacedObject> objects;
  double table_height = 0.0;
};

struct SettleParams {
  double table_height = 0.0;
  double drop_extent = 0.3;  // object centers are dropped inside this square
  int max_attempts = 100;
};

// Pose resting `mesh` (pre-rotated by `orientation`) dropped along -z at
// the given XY until first contact with the support surfaces or the table.
RigidTransform drop_pose(const TriangleMesh& mesh, const RotationMatrix& orientation,
                         double x, double y,
                         const std::vector<std::pair<const TriangleMesh*, RigidTransform>>& support,
                         double table_height);

// Clutter generation: seeded model picks, stable orientation + random yaw,
// random XY, drop to first contact; placements that interpenetrate deeper
// than 1 mm are resampled.
Scene settle_scene(const std::vector<ObjectModel>& models, int count, std::uint64_t seed,
                   const SettleParams& params = {});

struct DepthCamera {
  RigidTransform pose;  // camera-to-world; +z looks forward
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  void validate() const;
};

// 320x240, 60 degree vertical FOV, 0.8 m above and 0.6 m behind the
// workspace center, pitched 45 degrees down.
DepthCamera default_camera(double table_height = 0.0);

struct NoiseModel {
  double sigma = 0.003;
};

// One ray per pixel; hits on objects or the table patch become world-space
// points. `labels` (optional) receives, per point, the index of the hit
// object in scene.objects or -1 for the table.
PointCloud render_view_cloud(const Scene& scene, const std::vector<ObjectModel>& models,
                             const DepthCamera& camera, std::vector<int>* labels = nullptr);

// Scales each point's camera-ray depth by (1 + eps), eps ~ N(0, sigma^2).
PointCloud apply_depth_noise(const PointCloud& cloud, const Vec3& camera_origin,
                             const NoiseModel& noise, std::uint64_t seed);

// Area-weighted surface sampling of every object plus the table patch;
// normals are outward triangle normals. `labels` as in render_view_cloud.
PointCloud assemble_scene_cloud(const Scene& scene, const std::vector<ObjectModel>& models,
                                double samples_per_m2, std::uint64_t seed,
                                std::vector<int>* labels = nullptr);

// Scene + capture parameters as a JSON manifest.
struct SceneRecord {
  Scene scene;
  DepthCamera camera;
  double sigma = 0.003;
  std::uint64_t seed = 0;
};

void write_scene_record(const std::string& path, const SceneRecord& record);
SceneRecord read_scene_record(const std::string& path);

}  // namespace graspsynth
