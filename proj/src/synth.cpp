#include "psforge/synth.hpp"

#include <cmath>

#include "psforge/errors.hpp"
#include "psforge/geometry.hpp"
#include "psforge/rng.hpp"

namespace psforge {

namespace {

Eigen::Matrix3d look_at_origin(const Eigen::Vector3d& position) {
  const Eigen::Vector3d z = (-position).normalized();
  Eigen::Vector3d up(0.0, 1.0, 0.0);
  if (std::abs(z.dot(up)) > 0.99) up = Eigen::Vector3d(1.0, 0.0, 0.0);
  const Eigen::Vector3d x = z.cross(up).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d world_to_cam;
  world_to_cam.row(0) = x;
  world_to_cam.row(1) = y;
  world_to_cam.row(2) = z;
  return world_to_cam;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice_value(std::uint64_t seed, int image_id, int channel, int ix, int iy) {
  std::uint64_t h = splitmix64(seed ^ (static_cast<std::uint64_t>(image_id) << 32));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(channel) + 0x51ULL));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 20));
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, int image_id, int channel, double x, double y,
                   int cell) {
  const double gx = x / cell;
  const double gy = y / cell;
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const double fx = gx - x0;
  const double fy = gy - y0;
  const double v00 = lattice_value(seed, image_id, channel, x0, y0);
  const double v10 = lattice_value(seed, image_id, channel, x0 + 1, y0);
  const double v01 = lattice_value(seed, image_id, channel, x0, y0 + 1);
  const double v11 = lattice_value(seed, image_id, channel, x0 + 1, y0 + 1);
  const double top = v00 + fx * (v10 - v00);
  const double bot = v01 + fx * (v11 - v01);
  return top + fy * (bot - top);
}

}  // namespace

SceneModel generate_scene(const SynthConfig& cfg) {
  if (cfg.n_points <= 0 || cfg.n_cameras <= 0) {
    throw ContractViolation("generate_scene: counts must be positive");
  }
  if (!(cfg.ring_radius > cfg.box_half_extent)) {
    throw ContractViolation("generate_scene: ring radius must exceed the point box");
  }

  SceneModel scene;
  Rng rng(cfg.rng_seed);

  for (int k = 0; k < cfg.n_cameras; ++k) {
    const int id = k + 1;
    const double azimuth = 2.0 * M_PI * k / cfg.n_cameras;
    const double elevation = cfg.elevation_span_deg > 0.0
                                 ? uniform_range(rng, -cfg.elevation_span_deg,
                                                 cfg.elevation_span_deg) *
                                       M_PI / 180.0
                                 : 0.0;
    const Eigen::Vector3d position(cfg.ring_radius * std::cos(elevation) * std::cos(azimuth),
                                   cfg.ring_radius * std::sin(elevation),
                                   cfg.ring_radius * std::cos(elevation) * std::sin(azimuth));

    CameraIntrinsics cam;
    cam.camera_id = id;
    cam.width = cfg.width;
    cam.height = cfg.height;
    cam.focal_px = uniform_range(rng, cfg.focal_min, cfg.focal_max);
    cam.principal_point = Eigen::Vector2d(cfg.width / 2.0, cfg.height / 2.0);
    scene.cameras.emplace(id, cam);

    ImageView view;
    view.image_id = id;
    view.camera_id = id;
    view.orientation = look_at_origin(position);
    view.center = position;
    view.viewing_direction = viewing_direction_from_orientation(view.orientation);
    char name[32];
    std::snprintf(name, sizeof(name), "image%04d.ppm", id);
    view.name = name;
    scene.views.emplace(id, view);
  }

  for (int p = 0; p < cfg.n_points; ++p) {
    Track track;
    track.point_id = p + 1;
    for (int axis = 0; axis < 3; ++axis) {
      track.position(axis) = uniform_range(rng, -cfg.box_half_extent, cfg.box_half_extent);
    }
    for (const auto& [image_id, view] : scene.views) {
      if (!(depth(track.position, view) > 0.0)) continue;
      const CameraIntrinsics& cam = scene.cameras.at(view.camera_id);
      Eigen::Vector2d proj;
      try {
        proj = project(track.position, view, cam);
      } catch (const DomainError&) {
        continue;
      }
      if (cfg.noise_px > 0.0) {
        // Box-Muller on pinned uniforms.
        const double u1 = std::max(uniform_unit(rng), 1e-300);
        const double u2 = uniform_unit(rng);
        const double mag = cfg.noise_px * std::sqrt(-2.0 * std::log(u1));
        proj.x() += mag * std::cos(2.0 * M_PI * u2);
        proj.y() += mag * std::sin(2.0 * M_PI * u2);
      }
      if (proj.x() < 0.0 || proj.x() > cam.width || proj.y() < 0.0 || proj.y() > cam.height) {
        continue;
      }
      Observation obs;
      obs.image_id = image_id;
      obs.xy = proj;
      obs.scale = uniform_range(rng, cfg.scale_min, cfg.scale_max);
      obs.orientation_rad = uniform_range(rng, -M_PI, M_PI);
      track.observations.push_back(obs);
    }
    if (!track.observations.empty()) {
      scene.tracks.emplace(track.point_id, std::move(track));
    }
  }

  validate_scene(scene);
  return scene;
}

RawImage render_synthetic_image(int width, int height, std::uint64_t seed, int image_id) {
  RawImage img = make_image(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double coarse = value_noise(seed, image_id, c, x, y, 32);
        const double fine = value_noise(seed, image_id, c + 8, x, y, 5);
        const double v = 0.65 * coarse + 0.35 * fine;
        img.at(x, y, c) = static_cast<std::uint8_t>(std::lround(255.0 * v));
      }
    }
  }
  return img;
}

}  // namespace psforge
