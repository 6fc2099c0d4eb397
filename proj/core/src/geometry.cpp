#include "roadatlas/geometry.hpp"

namespace roadatlas {

std::vector<Point3> transform_points(std::span<const Point3> points, const Pose& pose) {
  std::vector<Point3> out;
  out.reserve(points.size());
  const Eigen::Matrix3d r = pose.rotation.toRotationMatrix();
  for (const Point3& p : points) out.push_back(r * p + pose.translation);
  return out;
}

}  // namespace roadatlas
