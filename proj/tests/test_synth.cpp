#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "psforge/colmap_io.hpp"
#include "psforge/geometry.hpp"
#include "psforge/synth.hpp"

using namespace psforge;

TEST_CASE("two planar cameras are antipodal") {
  SynthConfig cfg;
  cfg.n_cameras = 2;
  cfg.n_points = 10;
  cfg.elevation_span_deg = 0.0;
  const SceneModel scene = generate_scene(cfg);
  REQUIRE(scene.views.size() == 2);
  const double angle = angle_between(scene.views.at(1).viewing_direction,
                                     scene.views.at(2).viewing_direction);
  CHECK(angle == doctest::Approx(180.0));
}

TEST_CASE("generated scenes pass integrity validation") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    SynthConfig cfg;
    cfg.rng_seed = seed;
    cfg.n_cameras = 7;
    cfg.n_points = 40;
    CHECK_NOTHROW(validate_scene(generate_scene(cfg)));
  }
}

TEST_CASE("same seed reproduces bit-identical model text") {
  SynthConfig cfg;
  cfg.n_points = 50;
  cfg.n_cameras = 9;
  cfg.rng_seed = 1234;
  const SceneText a = write_scene(generate_scene(cfg));
  const SceneText b = write_scene(generate_scene(cfg));
  CHECK(a.cameras == b.cameras);
  CHECK(a.images == b.images);
  CHECK(a.points == b.points);
}

TEST_CASE("different seeds differ") {
  SynthConfig cfg;
  cfg.n_points = 20;
  cfg.n_cameras = 4;
  cfg.rng_seed = 1;
  const SceneText a = write_scene(generate_scene(cfg));
  cfg.rng_seed = 2;
  const SceneText b = write_scene(generate_scene(cfg));
  CHECK(a.points != b.points);
}

TEST_CASE("observations project exactly when noise is zero") {
  SynthConfig cfg;
  cfg.n_points = 30;
  cfg.n_cameras = 6;
  cfg.rng_seed = 99;
  const SceneModel scene = generate_scene(cfg);
  for (const auto& [id, track] : scene.tracks) {
    for (const Observation& obs : track.observations) {
      const ImageView& view = scene.views.at(obs.image_id);
      const Eigen::Vector2d proj =
          project(track.position, view, scene.cameras.at(view.camera_id));
      REQUIRE((proj - obs.xy).norm() < 1e-6);
    }
  }
}

TEST_CASE("noise jitters observations away from exact projections") {
  SynthConfig cfg;
  cfg.n_points = 30;
  cfg.n_cameras = 6;
  cfg.rng_seed = 99;
  cfg.noise_px = 2.0;
  const SceneModel scene = generate_scene(cfg);
  double max_residual = 0.0;
  for (const auto& [id, track] : scene.tracks) {
    for (const Observation& obs : track.observations) {
      const ImageView& view = scene.views.at(obs.image_id);
      const Eigen::Vector2d proj =
          project(track.position, view, scene.cameras.at(view.camera_id));
      max_residual = std::max(max_residual, (proj - obs.xy).norm());
    }
  }
  CHECK(max_residual > 0.5);
}

TEST_CASE("invalid configs are rejected") {
  SynthConfig cfg;
  cfg.n_points = 0;
  CHECK_THROWS_AS(generate_scene(cfg), ContractViolation);
  cfg = SynthConfig{};
  cfg.ring_radius = 0.5;  // inside the point box
  CHECK_THROWS_AS(generate_scene(cfg), ContractViolation);
}

TEST_CASE("rendered images are deterministic and textured") {
  const RawImage a = render_synthetic_image(64, 48, 7, 3);
  const RawImage b = render_synthetic_image(64, 48, 7, 3);
  CHECK(a.data == b.data);
  const RawImage c = render_synthetic_image(64, 48, 7, 4);
  CHECK(a.data != c.data);
  // not a constant image
  const auto [min_it, max_it] = std::minmax_element(a.data.begin(), a.data.end());
  CHECK(int(*max_it) - int(*min_it) > 30);
}
