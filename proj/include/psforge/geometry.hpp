#pragma once

#include <Eigen/Core>
#include <vector>

#include "psforge/scene.hpp"

namespace psforge {

// Symmetric pairwise viewpoint-angle matrix in degrees, zero diagonal.
class AngleMatrix {
 public:
  AngleMatrix() = default;
  explicit AngleMatrix(int n) : n_(n), entries_(static_cast<size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double operator()(int i, int j) const { return entries_[static_cast<size_t>(i) * n_ + j]; }
  void set(int i, int j, double deg) {
    entries_[static_cast<size_t>(i) * n_ + j] = deg;
    entries_[static_cast<size_t>(j) * n_ + i] = deg;
  }

 private:
  int n_ = 0;
  std::vector<double> entries_;
};

// Angle between two unit vectors in degrees, in [0, 180]. The dot
// product is clamped to [-1, 1] before the arccos.
// Throws ContractViolation if either input deviates from unit norm by
// more than 1e-9.
double angle_between(const Eigen::Vector3d& v_i, const Eigen::Vector3d& v_j);

// Signed distance of P from the camera center along the viewing
// direction: v . (P - c). Negative means behind the camera.
double depth(const Eigen::Vector3d& point, const ImageView& view);

// max(f_i/d_i, f_j/d_j) / min(f_i/d_i, f_j/d_j); symmetric, >= 1.
// Throws DomainError if any input is non-positive.
double scale_ratio(double f_i, double d_i, double f_j, double d_j);

// Pinhole projection into pixel coordinates.
// Throws DomainError if the point is not strictly in front of the camera.
Eigen::Vector2d project(const Eigen::Vector3d& point, const ImageView& view,
                        const CameraIntrinsics& cam);

// Pairwise angles between the viewing directions of the given views.
AngleMatrix angle_matrix(const std::vector<const ImageView*>& views);
AngleMatrix angle_matrix(const std::vector<Eigen::Vector3d>& directions);

}  // namespace psforge
