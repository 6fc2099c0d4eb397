#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace roadatlas {

using Point3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wraps a yaw angle into [0, 2*pi).
inline double wrap_azimuth(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

inline double horizontal_distance(const Point3& p) { return std::hypot(p.x(), p.y()); }

/// Rigid body transform, unit quaternion + translation.
struct Pose {
  Eigen::Vector3d translation{Eigen::Vector3d::Zero()};
  Eigen::Quaterniond rotation{Eigen::Quaterniond::Identity()};

  static Pose identity() { return Pose{}; }

  bool valid(double tol = 1e-9) const {
    return translation.allFinite() &&
           std::abs(rotation.norm() - 1.0) <= tol;
  }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  Pose inverse() const {
    Pose out;
    out.rotation = rotation.conjugate();
    out.translation = -(out.rotation * translation);
    return out;
  }

  /// this ∘ other: apply(other) first, then this.
  Pose compose(const Pose& other) const {
    Pose out;
    out.rotation = rotation * other.rotation;
    out.rotation.normalize();
    out.translation = rotation * other.translation + translation;
    return out;
  }

  double yaw() const {
    const Eigen::Matrix3d r = rotation.toRotationMatrix();
    return std::atan2(r(1, 0), r(0, 0));
  }

  static Pose from_xyz_yaw(double x, double y, double z, double yaw) {
    Pose p;
    p.translation = Eigen::Vector3d(x, y, z);
    p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
    return p;
  }
};

std::vector<Point3> transform_points(std::span<const Point3> points, const Pose& pose);

}  // namespace roadatlas
