#pragma once

// Shared hand-built fixtures and small random generators for tests.

#include <Eigen/Geometry>
#include <cmath>

#include "psforge/geometry.hpp"
#include "psforge/rng.hpp"
#include "psforge/sampler.hpp"
#include "psforge/scene.hpp"

namespace psforge::testing {

inline CameraIntrinsics make_camera(int id, double focal, int width = 1000, int height = 1000) {
  CameraIntrinsics cam;
  cam.camera_id = id;
  cam.focal_px = focal;
  cam.width = width;
  cam.height = height;
  cam.principal_point = Eigen::Vector2d(width / 2.0, height / 2.0);
  return cam;
}

// View at `position` looking at `target`.
inline ImageView make_lookat_view(int image_id, int camera_id, const Eigen::Vector3d& position,
                                  const Eigen::Vector3d& target, const std::string& name = "") {
  const Eigen::Vector3d z = (target - position).normalized();
  Eigen::Vector3d up(0.0, 1.0, 0.0);
  if (std::abs(z.dot(up)) > 0.99) up = Eigen::Vector3d(1.0, 0.0, 0.0);
  const Eigen::Vector3d x = z.cross(up).normalized();
  const Eigen::Vector3d y = z.cross(x);
  ImageView view;
  view.image_id = image_id;
  view.camera_id = camera_id;
  view.orientation.row(0) = x;
  view.orientation.row(1) = y;
  view.orientation.row(2) = z;
  view.center = position;
  view.viewing_direction = z;
  view.name = name.empty() ? "image" + std::to_string(image_id) + ".ppm" : name;
  return view;
}

// The worked four-camera geometry: coplanar viewing directions at
// 0/10/30/60 degrees from patch 0, equal f/d everywhere.
inline TrackGeometry four_camera_geometry() {
  TrackGeometry geom;
  for (double deg : {0.0, 10.0, 30.0, 60.0}) {
    const double rad = deg * M_PI / 180.0;
    geom.view_dir.emplace_back(std::cos(rad), std::sin(rad), 0.0);
    geom.focal.push_back(1.0);
    geom.depth.push_back(1.0);
  }
  return geom;
}

inline SamplingThresholds four_camera_thresholds() {
  SamplingThresholds th;
  th.sc_th = 2.5;
  th.min_v_th = 25.0;
  th.max_v_th = 100.0;
  th.scale_jump = 1.5;
  return th;
}

inline Eigen::Vector3d random_unit_vector(Rng& rng) {
  // Marsaglia-style rejection inside the unit ball.
  while (true) {
    const Eigen::Vector3d v(uniform_range(rng, -1.0, 1.0), uniform_range(rng, -1.0, 1.0),
                            uniform_range(rng, -1.0, 1.0));
    const double norm = v.norm();
    if (norm > 1e-3 && norm <= 1.0) return v / norm;
  }
}

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Vector3d axis = random_unit_vector(rng);
  const double angle = uniform_range(rng, 0.0, 2.0 * M_PI);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline TrackGeometry random_track_geometry(Rng& rng, int max_size = 12) {
  const int n = 1 + static_cast<int>(uniform_index(rng, max_size));
  TrackGeometry geom;
  for (int k = 0; k < n; ++k) {
    geom.view_dir.push_back(random_unit_vector(rng));
    geom.focal.push_back(uniform_range(rng, 300.0, 3000.0));
    geom.depth.push_back(uniform_range(rng, 0.5, 50.0));
  }
  return geom;
}

inline SamplingThresholds random_thresholds(Rng& rng) {
  SamplingThresholds th;
  th.sc_th = uniform_range(rng, 1.1, 5.0);
  th.min_v_th = uniform_range(rng, 0.0, 90.0);
  th.max_v_th = th.min_v_th + uniform_range(rng, 0.0, 180.0 - th.min_v_th);
  th.scale_jump = 1.5;
  return th;
}

}  // namespace psforge::testing
