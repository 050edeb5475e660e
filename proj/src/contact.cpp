#include "graspsynth/contact.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace graspsynth {

namespace {

Vec3 to_gripper(const GraspFrame& frame, const Vec3& p) {
  return frame.pose.rotation.matrix().transpose() * (p - frame.pose.translation);
}

bool in_closing_region(const Vec3& q, const GripperGeometry& g) {
  return std::abs(q.x()) <= 0.5 * g.max_opening && std::abs(q.y()) <= 0.5 * g.finger_thickness &&
         q.z() <= 0.0 && q.z() >= -g.finger_length;
}

bool in_gripper_body(const Vec3& q, const GripperGeometry& g) {
  if (std::abs(q.y()) > 0.5 * g.finger_thickness) return false;
  const double ax = std::abs(q.x());
  const double outer = 0.5 * g.max_opening + g.finger_thickness;
  if (q.z() <= 0.0 && q.z() >= -g.finger_length)
    return ax >= 0.5 * g.max_opening && ax <= outer;   // fingers
  if (q.z() <= -g.finger_length && q.z() >= -(g.finger_length + g.palm_depth))
    return ax <= outer;                                // palm block
  return false;
}

// Points sitting in the band the closing fingers sweep through block the
// pair: within half a finger thickness of the closing line, between the
// contact (plus pad give) and the outer finger face at full opening.
bool closing_line_clear(const PointCloud& cloud, const PointBvh& index, const Vec3& p_i,
                        const Vec3& p_j, const GripperGeometry& g) {
  const Vec3 mid = 0.5 * (p_i + p_j);
  const double sep = (p_j - p_i).norm();
  const Vec3 u = (p_j - p_i) / sep;
  const double s_min = 0.5 * sep + g.pad_deformation;
  const double s_max = 0.5 * g.max_opening + g.finger_thickness;
  if (s_min > s_max) return true;
  const double r_max = 0.5 * g.finger_thickness;
  const double reach = std::sqrt(s_max * s_max + r_max * r_max) + 1e-9;
  for (int k : index.radius_query(mid, reach)) {
    const Vec3 d = cloud.points[k] - mid;
    const double s = d.dot(u);
    if (std::abs(s) < s_min || std::abs(s) > s_max) continue;
    if ((d - s * u).squaredNorm() <= r_max * r_max) return false;
  }
  return true;
}

// Realized contacts of a pose: among closing-region points, each side's
// contact is the point nearest that side's fingertip edge. Empty side or
// coincident picks score 0.
double realized_antipodal(const PointCloud& cloud, const std::vector<int>& region,
                          const GraspFrame& frame, const GripperGeometry& g) {
  int best_pos = -1, best_neg = -1;
  double d_pos = std::numeric_limits<double>::max();
  double d_neg = std::numeric_limits<double>::max();
  const double half_open = 0.5 * g.max_opening;
  for (int k : region) {
    const Vec3 q = to_gripper(frame, cloud.points[k]);
    if (q.x() >= 0.0) {
      const double d = (q.x() - half_open) * (q.x() - half_open) + q.z() * q.z();
      if (d < d_pos) { d_pos = d; best_pos = k; }
    } else {
      const double d = (q.x() + half_open) * (q.x() + half_open) + q.z() * q.z();
      if (d < d_neg) { d_neg = d; best_neg = k; }
    }
  }
  if (best_pos < 0 || best_neg < 0) return 0.0;
  const Vec3& a = cloud.points[best_neg];
  const Vec3& b = cloud.points[best_pos];
  if ((b - a).norm() < 1e-12) return 0.0;
  return antipodal_score(a, cloud.normals[best_neg], b, cloud.normals[best_pos]);
}

struct PoseScores {
  double antipodal = 0.0;
  double occupancy = 0.0;
  bool collision_free = false;

  double product() const { return collision_free ? antipodal * occupancy : 0.0; }
};

PoseScores score_pose(const GraspFrame& frame, const PointCloud& view, const PointBvh& view_index,
                      const PointCloud& scene, const PointBvh& scene_index,
                      const GripperGeometry& g) {
  PoseScores s;
  const std::vector<int> region = closing_region_points(view, view_index, frame, g);
  s.occupancy = occupancy_score(static_cast<int>(region.size()));
  s.antipodal = realized_antipodal(view, region, frame, g);
  s.collision_free = !collision_check(scene, scene_index, frame, g);
  return s;
}

}  // namespace

void GripperGeometry::validate() const {
  const double dims[] = {max_opening,  finger_length,   finger_thickness,
                         palm_depth,   pad_deformation, smoothing_radius};
  for (double d : dims) {
    if (!(d > 0.0)) throw std::invalid_argument("gripper dimensions must be positive");
  }
  if (!(pad_deformation < max_opening))
    throw std::invalid_argument("pad_deformation must be smaller than max_opening");
}

GripperGeometry GripperGeometry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gripper config: " + path);
  GripperGeometry g;
  std::map<std::string, double*> fields = {
      {"max_opening", &g.max_opening},
      {"finger_length", &g.finger_length},
      {"finger_thickness", &g.finger_thickness},
      {"palm_depth", &g.palm_depth},
      {"pad_deformation", &g.pad_deformation},
      {"smoothing_radius", &g.smoothing_radius},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto it = fields.find(key);
    if (it == fields.end())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    double value = 0.0;
    if (!(ls >> value))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing value for '" +
                               key + "'");
    *it->second = value;
  }
  g.validate();
  return g;
}

void GripperGeometry::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gripper config: " + path);
  out << "# gripper dimensions, meters\n";
  out << "max_opening " << max_opening << "\n";
  out << "finger_length " << finger_length << "\n";
  out << "finger_thickness " << finger_thickness << "\n";
  out << "palm_depth " << palm_depth << "\n";
  out << "pad_deformation " << pad_deformation << "\n";
  out << "smoothing_radius " << smoothing_radius << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

double antipodal_score(const Vec3& p_i, const UnitVec3& n_i, const Vec3& p_j,
                       const UnitVec3& n_j) {
  const Vec3 d = p_j - p_i;
  const double len = d.norm();
  if (len < 1e-12) throw std::invalid_argument("antipodal_score: coincident contact points");
  const Vec3 u = d / len;
  // Outward normals of a graspable pair face away from each other along
  // the closing line.
  const double c_i = -n_i.vec().dot(u);
  const double c_j = n_j.vec().dot(u);
  if (c_i < 0.0 || c_j < 0.0) return 0.0;
  return c_i * c_j;
}

std::vector<ContactPair> find_contact_pairs(const PointCloud& cloud,
                                            const GripperGeometry& gripper, double threshold) {
  return find_contact_pairs(cloud, PointBvh(cloud.points), gripper, threshold);
}

std::vector<ContactPair> find_contact_pairs(const PointCloud& cloud, const PointBvh& index,
                                            const GripperGeometry& gripper, double threshold) {
  cloud.require_normals();
  std::vector<ContactPair> pairs;
  const int n = static_cast<int>(cloud.points.size());
  for (int i = 0; i < n; ++i) {
    for (int j : index.radius_query(cloud.points[i], gripper.max_opening)) {
      if (j <= i) continue;
      if ((cloud.points[j] - cloud.points[i]).norm() < 1e-12) continue;
      const double score =
          antipodal_score(cloud.points[i], cloud.normals[i], cloud.points[j], cloud.normals[j]);
      if (score < threshold) continue;
      if (!closing_line_clear(cloud, index, cloud.points[i], cloud.points[j], gripper)) continue;
      pairs.push_back({i, j, score});
    }
  }
  return pairs;
}

std::vector<GraspFrame> frames_from_pair(const ContactPair& pair, const PointCloud& cloud,
                                         const GripperGeometry& /*gripper*/, int approach_count) {
  if (approach_count < 1) throw std::invalid_argument("frames_from_pair: approach_count < 1");
  const Vec3& p_i = cloud.points[pair.i];
  const Vec3& p_j = cloud.points[pair.j];
  const Vec3 x = UnitVec3(p_j - p_i).vec();

  // Fixed reference direction: the world axis least aligned with x.
  int least = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(x[k]) < std::abs(x[least])) least = k;
  }
  const Vec3 e = Vec3::Unit(least);
  const Vec3 r0 = (e - e.dot(x) * x).normalized();
  const Vec3 s0 = x.cross(r0);

  std::vector<GraspFrame> frames;
  frames.reserve(approach_count);
  const Vec3 origin = 0.5 * (p_i + p_j);
  for (int k = 0; k < approach_count; ++k) {
    const double theta = 2.0 * M_PI * k / approach_count;
    const Vec3 z = std::cos(theta) * r0 + std::sin(theta) * s0;
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    frames.push_back({RigidTransform{RotationMatrix::from_matrix_unchecked(r), origin}});
  }
  return frames;
}

std::vector<int> closing_region_points(const PointCloud& cloud, const GraspFrame& frame,
                                       const GripperGeometry& gripper) {
  std::vector<int> out;
  for (std::size_t k = 0; k < cloud.points.size(); ++k) {
    if (in_closing_region(to_gripper(frame, cloud.points[k]), gripper))
      out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> closing_region_points(const PointCloud& cloud, const PointBvh& index,
                                       const GraspFrame& frame, const GripperGeometry& gripper) {
  const Vec3 center = frame.pose.apply(Vec3(0.0, 0.0, -0.5 * gripper.finger_length));
  const double radius = Vec3(0.5 * gripper.max_opening, 0.5 * gripper.finger_thickness,
                             0.5 * gripper.finger_length)
                            .norm() +
                        1e-9;
  std::vector<int> out;
  for (int k : index.radius_query(center, radius)) {
    if (in_closing_region(to_gripper(frame, cloud.points[k]), gripper)) out.push_back(k);
  }
  return out;
}

double occupancy_score(int count) {
  if (count <= 1) return 0.0;
  return std::min(std::log(static_cast<double>(count)), 6.0);
}

bool collision_check(const PointCloud& scene_cloud, const GraspFrame& frame,
                     const GripperGeometry& gripper) {
  for (const Vec3& p : scene_cloud.points) {
    if (in_gripper_body(to_gripper(frame, p), gripper)) return true;
  }
  return false;
}

bool collision_check(const PointCloud& scene_cloud, const PointBvh& index,
                     const GraspFrame& frame, const GripperGeometry& gripper) {
  const double half_depth = 0.5 * (gripper.finger_length + gripper.palm_depth);
  const Vec3 center = frame.pose.apply(Vec3(0.0, 0.0, -half_depth));
  const double radius = Vec3(0.5 * gripper.max_opening + gripper.finger_thickness,
                             0.5 * gripper.finger_thickness, half_depth)
                            .norm() +
                        1e-9;
  for (int k : index.radius_query(center, radius)) {
    if (in_gripper_body(to_gripper(frame, scene_cloud.points[k]), gripper)) return true;
  }
  return false;
}

std::vector<Twist> default_perturbations(const GraspFrame& frame, double translation,
                                         double angle) {
  std::vector<Twist> out;
  out.reserve(13);
  out.push_back(Twist::zero());
  const Mat3& r = frame.pose.rotation.matrix();
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0}) out.push_back({Vec3::Zero(), sign * translation * r.col(axis)});
  }
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0})
      out.push_back(rotation_about_point(r.col(axis), sign * angle, frame.pose.translation));
  }
  return out;
}

GraspScores robust_score(const GraspFrame& frame, const PointCloud& view_cloud,
                         const PointCloud& scene_cloud, const GripperGeometry& gripper,
                         const std::vector<Twist>& perturbations) {
  return robust_score(frame, view_cloud, PointBvh(view_cloud.points), scene_cloud,
                      PointBvh(scene_cloud.points), gripper, perturbations);
}

GraspScores robust_score(const GraspFrame& frame, const PointCloud& view_cloud,
                         const PointBvh& view_index, const PointCloud& scene_cloud,
                         const PointBvh& scene_index, const GripperGeometry& gripper,
                         const std::vector<Twist>& perturbations) {
  view_cloud.require_normals();
  const PoseScores nominal =
      score_pose(frame, view_cloud, view_index, scene_cloud, scene_index, gripper);
  // The nominal pose always participates in the minimum, so robust is
  // bounded by the nominal product whether or not the caller passed the
  // zero twist explicitly.
  double min_product = nominal.product();
  for (const Twist& xi : perturbations) {
    if (xi.omega.squaredNorm() == 0.0 && xi.v.squaredNorm() == 0.0) continue;
    const GraspFrame perturbed{se3_exp(xi) * frame.pose};
    const PoseScores s =
        score_pose(perturbed, view_cloud, view_index, scene_cloud, scene_index, gripper);
    min_product = std::min(min_product, s.product());
    if (min_product == 0.0) break;
  }
  GraspScores scores;
  scores.antipodal = nominal.antipodal;
  scores.occupancy = nominal.occupancy;
  scores.collision_free = nominal.collision_free;
  scores.robust = min_product;
  return scores;
}

}  // namespace graspsynth
