#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace psforge {

using point3d_id_t = std::int64_t;

struct CameraIntrinsics {
  int camera_id = -1;
  double focal_px = 0.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d::Zero();
  int width = 0;
  int height = 0;
};

struct ImageView {
  int image_id = -1;
  int camera_id = -1;
  // World-to-camera rotation.
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  // Camera center in world coordinates.
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  // Optical axis (+z of the camera) in world coordinates; unit norm.
  Eigen::Vector3d viewing_direction = Eigen::Vector3d::UnitZ();
  std::string name;
};

struct Observation {
  int image_id = -1;
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
  double scale = 0.0;
  double orientation_rad = 0.0;
};

struct Track {
  point3d_id_t point_id = -1;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  // Kept in file order; sampling indices refer to this order.
  std::vector<Observation> observations;
};

struct SceneModel {
  std::map<int, CameraIntrinsics> cameras;
  std::map<int, ImageView> views;
  std::map<point3d_id_t, Track> tracks;
};

// Derives the viewing direction from a world-to-camera rotation.
Eigen::Vector3d viewing_direction_from_orientation(const Eigen::Matrix3d& world_to_cam);

// Checks every SceneModel invariant: camera/view field ranges, rotation
// orthonormality (1e-9) with det +1, unit viewing direction consistent
// with the orientation, observation bounds, cross-reference resolution,
// non-empty tracks without duplicate image ids.
// Throws IntegrityError on the first violation.
void validate_scene(const SceneModel& scene);

// Sorted intersection of the image ids observing both tracks.
std::vector<int> common_images(const Track& track_a, const Track& track_b);

}  // namespace psforge
