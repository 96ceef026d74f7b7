#include "psforge/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "psforge/errors.hpp"

namespace psforge {

namespace {
constexpr double kUnitTol = 1e-9;
constexpr double kRadToDeg = 180.0 / M_PI;
}  // namespace

double angle_between(const Eigen::Vector3d& v_i, const Eigen::Vector3d& v_j) {
  if (std::abs(v_i.norm() - 1.0) > kUnitTol || std::abs(v_j.norm() - 1.0) > kUnitTol) {
    throw ContractViolation("angle_between requires unit vectors");
  }
  const double dot = std::clamp(v_i.dot(v_j), -1.0, 1.0);
  return std::acos(dot) * kRadToDeg;
}

double depth(const Eigen::Vector3d& point, const ImageView& view) {
  return view.viewing_direction.dot(point - view.center);
}

double scale_ratio(double f_i, double d_i, double f_j, double d_j) {
  if (!(f_i > 0.0) || !(f_j > 0.0)) {
    throw DomainError("scale_ratio: focal lengths must be positive");
  }
  if (!(d_i > 0.0) || !(d_j > 0.0)) {
    throw DomainError("scale_ratio: patch behind camera (non-positive depth)");
  }
  const double r_i = f_i / d_i;
  const double r_j = f_j / d_j;
  return std::max(r_i, r_j) / std::min(r_i, r_j);
}

Eigen::Vector2d project(const Eigen::Vector3d& point, const ImageView& view,
                        const CameraIntrinsics& cam) {
  const Eigen::Vector3d in_cam = view.orientation * (point - view.center);
  if (!(in_cam.z() > 0.0)) {
    throw DomainError("project: point behind camera");
  }
  return cam.focal_px * in_cam.head<2>() / in_cam.z() + cam.principal_point;
}

AngleMatrix angle_matrix(const std::vector<Eigen::Vector3d>& directions) {
  const int n = static_cast<int>(directions.size());
  AngleMatrix a(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      a.set(i, j, angle_between(directions[i], directions[j]));
    }
  }
  return a;
}

AngleMatrix angle_matrix(const std::vector<const ImageView*>& views) {
  std::vector<Eigen::Vector3d> directions;
  directions.reserve(views.size());
  for (const ImageView* view : views) directions.push_back(view->viewing_direction);
  return angle_matrix(directions);
}

}  // namespace psforge
