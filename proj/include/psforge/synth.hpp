#pragma once

#include <cstdint>

#include "psforge/image.hpp"
#include "psforge/scene.hpp"

namespace psforge {

struct SynthConfig {
  int n_points = 100;
  int n_cameras = 8;
  double ring_radius = 10.0;   // must exceed the point-box extent
  double box_half_extent = 1.0;
  double focal_min = 800.0;
  double focal_max = 1600.0;
  int width = 1280;
  int height = 960;
  double scale_min = 1.6;
  double scale_max = 15.0;
  // Cameras sit on a ring around the origin; each one is lifted by a
  // deterministic elevation within +-elevation_span_deg. Zero keeps the
  // ring planar (two cameras become exactly antipodal).
  double elevation_span_deg = 20.0;
  double noise_px = 0.0;  // optional Gaussian jitter on observations
  std::uint64_t rng_seed = 1;
};

// Deterministic synthetic scene: cameras on a sphere looking at the
// origin, points in a box, observations computed by exact projection
// (residual < 1e-6 px when noise_px is 0). Points visible in no camera
// are dropped.
SceneModel generate_scene(const SynthConfig& cfg);

// Procedural value-noise texture, reproducible from (seed, image_id).
RawImage render_synthetic_image(int width, int height, std::uint64_t seed, int image_id);

}  // namespace psforge
