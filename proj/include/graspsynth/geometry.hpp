#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace graspsynth {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kOrthoTol = 1e-9;

// Direction with unit norm enforced at construction.
class UnitVec3 {
 public:
  explicit UnitVec3(const Vec3& v) {
    const double n = v.norm();
    if (n < 1e-12) throw std::invalid_argument("UnitVec3: zero-length vector");
    v_ = v / n;
  }
  UnitVec3() : v_(0.0, 0.0, 1.0) {}

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  UnitVec3 flipped() const { return UnitVec3(-v_); }

 private:
  Vec3 v_;
};

// Element of SO(3). from_matrix validates orthonormality and det = +1.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}

  static RotationMatrix identity() { return RotationMatrix(); }

  static RotationMatrix from_matrix(const Mat3& m) {
    if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() > kOrthoTol)
      throw std::invalid_argument("RotationMatrix: not orthonormal");
    if (std::abs(m.determinant() - 1.0) > kOrthoTol)
      throw std::invalid_argument("RotationMatrix: determinant != +1");
    RotationMatrix r;
    r.m_ = m;
    return r;
  }

  // For results that are rotations by construction (products, transposes,
  // closed-form exponentials). Skips the validation pass.
  static RotationMatrix from_matrix_unchecked(const Mat3& m) {
    RotationMatrix r;
    r.m_ = m;
    return r;
  }

  static RotationMatrix about_axis(const Vec3& axis, double angle) {
    return from_matrix_unchecked(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
  }

  // Rotation taking direction `from` onto direction `to`.
  static RotationMatrix between(const Vec3& from, const Vec3& to) {
    Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(from, to);
    return from_matrix_unchecked(q.toRotationMatrix());
  }

  const Mat3& matrix() const { return m_; }
  RotationMatrix inverse() const { return from_matrix_unchecked(m_.transpose()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotationMatrix operator*(const RotationMatrix& o) const {
    return from_matrix_unchecked(m_ * o.m_);
  }

  // Rotation angle of R1^T R2, in [0, pi].
  double angle_to(const RotationMatrix& o) const {
    const double c = ((m_.transpose() * o.m_).trace() - 1.0) * 0.5;
    return std::acos(std::clamp(c, -1.0, 1.0));
  }

 private:
  Mat3 m_;
};

// Element of SE(3): x' = R x + t.
struct RigidTransform {
  RotationMatrix rotation;
  Vec3 translation{0.0, 0.0, 0.0};

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& d) const { return rotation * d; }

  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }

  RigidTransform inverse() const {
    RotationMatrix rt = rotation.inverse();
    return {rt, -(rt * translation)};
  }
};

// se(3) coordinates: rotational part first, then linear.
struct Twist {
  Vec3 omega{0.0, 0.0, 0.0};
  Vec3 v{0.0, 0.0, 0.0};

  static Twist zero() { return {}; }
};

inline Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

// Closed-form exponential map se(3) -> SE(3). Series branch below 1e-8 rad
// avoids cancellation in the (1-cos)/theta^2 and (theta-sin)/theta^3 terms.
inline RigidTransform se3_exp(const Twist& xi) {
  const double theta = xi.omega.norm();
  const Mat3 w = skew(xi.omega);
  Mat3 r, g;
  if (theta < 1e-8) {
    r = Mat3::Identity() + w + 0.5 * w * w;
    g = Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  } else {
    const double t2 = theta * theta;
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / t2;
    const double c = (theta - std::sin(theta)) / (t2 * theta);
    r = Mat3::Identity() + a * w + b * w * w;
    g = Mat3::Identity() + b * w + c * w * w;
  }
  return {RotationMatrix::from_matrix_unchecked(r), g * xi.v};
}

// Twist whose exponential rotates about `axis` through point `pivot`.
inline Twist rotation_about_point(const Vec3& axis, double angle, const Vec3& pivot) {
  const Vec3 omega = axis.normalized() * angle;
  return {omega, -omega.cross(pivot)};
}

// Positions plus optional per-point normals (1:1 with points when present).
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<UnitVec3> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  void require_normals() const {
    if (normals.size() != points.size())
      throw std::runtime_error("point cloud has no per-point normals");
  }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  // Index range and non-degeneracy (area > 1e-12 m^2).
  void validate() const {
    const int n = static_cast<int>(vertices.size());
    for (const auto& t : triangles) {
      for (int k : t) {
        if (k < 0 || k >= n) throw std::runtime_error("triangle index out of range");
      }
      const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
      const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
      if (0.5 * e1.cross(e2).norm() <= 1e-12)
        throw std::runtime_error("degenerate triangle");
    }
  }

  double triangle_area(int i) const {
    const auto& t = triangles[i];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }

  Vec3 triangle_normal(int i) const {
    const auto& t = triangles[i];
    return (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).normalized();
  }
};

}  // namespace graspsynth
