#include "psforge/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psforge/errors.hpp"

namespace psforge {

namespace {

std::string describe(const char* kind, std::int64_t id) {
  std::ostringstream os;
  os << kind << " " << id;
  return os.str();
}

}  // namespace

Eigen::Vector3d viewing_direction_from_orientation(const Eigen::Matrix3d& world_to_cam) {
  // R maps world to camera, so the camera +z axis is R^T * e_z, i.e. the
  // third row of R.
  return world_to_cam.row(2).transpose();
}

void validate_scene(const SceneModel& scene) {
  constexpr double kRotTol = 1e-9;
  constexpr double kDirTol = 1e-12;

  for (const auto& [id, cam] : scene.cameras) {
    if (cam.camera_id != id) {
      throw IntegrityError(describe("camera", id) + ": key/id mismatch");
    }
    if (!(cam.focal_px > 0.0)) {
      throw IntegrityError(describe("camera", id) + ": focal must be positive");
    }
    if (cam.width <= 0 || cam.height <= 0) {
      throw IntegrityError(describe("camera", id) + ": non-positive image size");
    }
    const Eigen::Vector2d& pp = cam.principal_point;
    if (pp.x() < 0.0 || pp.x() > cam.width || pp.y() < 0.0 || pp.y() > cam.height) {
      throw IntegrityError(describe("camera", id) + ": principal point outside image");
    }
  }

  for (const auto& [id, view] : scene.views) {
    if (view.image_id != id) {
      throw IntegrityError(describe("image", id) + ": key/id mismatch");
    }
    if (scene.cameras.find(view.camera_id) == scene.cameras.end()) {
      throw IntegrityError(describe("image", id) + ": dangling camera id " +
                           std::to_string(view.camera_id));
    }
    const Eigen::Matrix3d& r = view.orientation;
    const Eigen::Matrix3d residual = r * r.transpose() - Eigen::Matrix3d::Identity();
    if (residual.cwiseAbs().maxCoeff() > kRotTol) {
      throw IntegrityError(describe("image", id) + ": orientation not orthonormal");
    }
    if (std::abs(r.determinant() - 1.0) > kRotTol) {
      throw IntegrityError(describe("image", id) + ": orientation determinant != +1");
    }
    if (std::abs(view.viewing_direction.norm() - 1.0) > kDirTol) {
      throw IntegrityError(describe("image", id) + ": viewing direction not unit norm");
    }
    const Eigen::Vector3d derived = viewing_direction_from_orientation(r);
    if ((view.viewing_direction - derived).norm() > kRotTol) {
      throw IntegrityError(describe("image", id) +
                           ": viewing direction inconsistent with orientation");
    }
  }

  for (const auto& [id, track] : scene.tracks) {
    if (track.point_id != id) {
      throw IntegrityError(describe("point", id) + ": key/id mismatch");
    }
    if (track.observations.empty()) {
      throw IntegrityError(describe("point", id) + ": track has no observations");
    }
    std::vector<int> seen;
    seen.reserve(track.observations.size());
    for (const Observation& obs : track.observations) {
      auto view_it = scene.views.find(obs.image_id);
      if (view_it == scene.views.end()) {
        throw IntegrityError(describe("point", id) + ": dangling image id " +
                             std::to_string(obs.image_id));
      }
      if (std::find(seen.begin(), seen.end(), obs.image_id) != seen.end()) {
        throw IntegrityError(describe("point", id) + ": duplicate observation in image " +
                             std::to_string(obs.image_id));
      }
      seen.push_back(obs.image_id);
      if (!(obs.scale > 0.0)) {
        throw IntegrityError(describe("point", id) + ": non-positive feature scale in image " +
                             std::to_string(obs.image_id));
      }
      const CameraIntrinsics& cam = scene.cameras.at(view_it->second.camera_id);
      if (obs.xy.x() < 0.0 || obs.xy.x() > cam.width || obs.xy.y() < 0.0 ||
          obs.xy.y() > cam.height) {
        throw IntegrityError(describe("point", id) + ": observation outside image " +
                             std::to_string(obs.image_id));
      }
    }
  }
}

std::vector<int> common_images(const Track& track_a, const Track& track_b) {
  std::vector<int> ids_a, ids_b;
  ids_a.reserve(track_a.observations.size());
  ids_b.reserve(track_b.observations.size());
  for (const Observation& obs : track_a.observations) ids_a.push_back(obs.image_id);
  for (const Observation& obs : track_b.observations) ids_b.push_back(obs.image_id);
  std::sort(ids_a.begin(), ids_a.end());
  std::sort(ids_b.begin(), ids_b.end());
  std::vector<int> out;
  std::set_intersection(ids_a.begin(), ids_a.end(), ids_b.begin(), ids_b.end(),
                        std::back_inserter(out));
  return out;
}

}  // namespace psforge
