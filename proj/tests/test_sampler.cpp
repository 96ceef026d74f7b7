#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "psforge/errors.hpp"
#include "psforge/sampler.hpp"
#include "psforge/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace psforge;
using psforge::testing::four_camera_geometry;
using psforge::testing::four_camera_thresholds;
using psforge::testing::random_thresholds;
using psforge::testing::random_track_geometry;

TEST_CASE("threshold validation") {
  SamplingThresholds th;
  CHECK_NOTHROW(validate_thresholds(th));
  th.sc_th = 1.0;
  CHECK_THROWS_AS(validate_thresholds(th), ContractViolation);
  th = SamplingThresholds{};
  th.min_v_th = 60.0;
  th.max_v_th = 50.0;
  CHECK_THROWS_AS(validate_thresholds(th), ContractViolation);
  th = SamplingThresholds{};
  th.scale_jump = 1.0;
  CHECK_THROWS_AS(validate_thresholds(th), ContractViolation);
}

TEST_CASE("single-patch track keeps only the reference") {
  TrackGeometry geom;
  geom.focal = {1.0};
  geom.depth = {1.0};
  geom.view_dir = {Eigen::Vector3d(0, 0, 1)};
  const MatchSet set = build_match_set(0, geom, angle_matrix(geom.view_dir), SamplingThresholds{});
  CHECK(set.members == std::vector<int>{0});
}

TEST_CASE("hand trace: four cameras at 0/10/30/60 degrees give [0,3,2]") {
  const TrackGeometry geom = four_camera_geometry();
  const MatchSet set =
      build_match_set(0, geom, angle_matrix(geom.view_dir), four_camera_thresholds());
  CHECK(set.members == std::vector<int>{0, 3, 2});
}

TEST_CASE("candidates beyond max_v_th leave the set singleton") {
  TrackGeometry geom = four_camera_geometry();
  SamplingThresholds th = four_camera_thresholds();
  th.min_v_th = 0.0;
  th.max_v_th = 5.0;  // everything else is at >= 10 degrees
  const MatchSet set = build_match_set(0, geom, angle_matrix(geom.view_dir), th);
  CHECK(set.members == std::vector<int>{0});
}

TEST_CASE("out-of-range reference index is a contract violation") {
  const TrackGeometry geom = four_camera_geometry();
  CHECK_THROWS_AS(build_match_set(4, geom, angle_matrix(geom.view_dir), SamplingThresholds{}),
                  ContractViolation);
}

TEST_CASE("non-positive depth is a contract violation") {
  TrackGeometry geom = four_camera_geometry();
  geom.depth[2] = -1.0;
  CHECK_THROWS_AS(build_match_set(0, geom, angle_matrix(geom.view_dir), SamplingThresholds{}),
                  ContractViolation);
}

TEST_CASE("two patches 40 degrees apart form exactly one pair") {
  TrackGeometry geom;
  const double rad = 40.0 * M_PI / 180.0;
  geom.view_dir = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(std::cos(rad), std::sin(rad), 0)};
  geom.focal = {1.0, 1.0};
  geom.depth = {1.0, 1.0};
  SamplingThresholds th = four_camera_thresholds();  // min 25, max 100
  const std::vector<PairRecord> pairs = sample_track_pairs(geom, th);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].a == 0);
  CHECK(pairs[0].b == 1);
  CHECK(pairs[0].angle_deg == doctest::Approx(40.0));
}

TEST_CASE("empty track yields no pairs") {
  CHECK(sample_track_pairs(TrackGeometry{}, SamplingThresholds{}).empty());
}

TEST_CASE("no duplicate unordered pairs, min_v_th = 0") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    TrackGeometry geom = random_track_geometry(rng);
    // equal scales, everything within reach
    std::fill(geom.focal.begin(), geom.focal.end(), 1.0);
    std::fill(geom.depth.begin(), geom.depth.end(), 1.0);
    SamplingThresholds th;
    th.min_v_th = 0.0;
    th.max_v_th = 180.0;
    const std::vector<PairRecord> pairs = sample_track_pairs(geom, th);
    std::set<std::pair<int, int>> seen;
    for (const PairRecord& rec : pairs) {
      const auto key = std::minmax(rec.a, rec.b);
      CHECK(seen.insert(key).second);  // brute-force duplicate scan
    }
  }
}

TEST_CASE("oracle equivalence on random tracks") {
  Rng rng(101);
  for (int trial = 0; trial < 2000; ++trial) {
    const TrackGeometry geom = random_track_geometry(rng);
    const SamplingThresholds th = random_thresholds(rng);
    const AngleMatrix angles = angle_matrix(geom.view_dir);
    for (int i = 0; i < geom.size(); ++i) {
      const MatchSet ours = build_match_set(i, geom, angles, th);
      const MatchSet ref = oracle::oracle_match_set(i, geom, angles, th);
      REQUIRE(ours.members == ref.members);
    }
  }
}

TEST_CASE("oracle agrees on the hand trace") {
  const TrackGeometry geom = four_camera_geometry();
  const MatchSet set =
      oracle::oracle_match_set(0, geom, angle_matrix(geom.view_dir), four_camera_thresholds());
  CHECK(set.members == std::vector<int>{0, 3, 2});
}

TEST_CASE("acceptance soundness and maximality by replay") {
  Rng rng(131);
  for (int trial = 0; trial < 300; ++trial) {
    const TrackGeometry geom = random_track_geometry(rng);
    const SamplingThresholds th = random_thresholds(rng);
    const AngleMatrix angles = angle_matrix(geom.view_dir);
    const int reference = static_cast<int>(uniform_index(rng, geom.size()));
    const MatchSet set = build_match_set(reference, geom, angles, th);

    // Termination/size bound.
    REQUIRE(set.members.size() <= static_cast<size_t>(geom.size()));
    REQUIRE(set.members.front() == reference);

    const auto fd = [&geom](int k) { return geom.focal[k] / geom.depth[k]; };
    const auto ratio = [&fd](int p, int q) {
      return std::max(fd(p), fd(q)) / std::min(fd(p), fd(q));
    };
    const auto predicate = [&](const std::vector<int>& members, int j) {
      double mvd = 1e9;
      int nearest = members.front();
      double nearest_angle = angles(nearest, j);
      for (int h : members) {
        mvd = std::min(mvd, angles(h, j));
        if (angles(h, j) < nearest_angle || (angles(h, j) == nearest_angle && h < nearest)) {
          nearest_angle = angles(h, j);
          nearest = h;
        }
      }
      return (mvd >= th.min_v_th || ratio(nearest, j) > th.scale_jump) &&
             ratio(reference, j) < th.sc_th;
    };

    // Every accepted member satisfied the predicate against the prefix.
    std::vector<int> prefix{reference};
    for (size_t k = 1; k < set.members.size(); ++k) {
      const int j = set.members[k];
      CHECK(j > reference);
      CHECK(angles(reference, j) <= th.max_v_th);
      CHECK(predicate(prefix, j));
      prefix.push_back(j);
    }

    // Maximality: the best remaining candidate fails or none remains.
    int best = -1;
    double best_mvd = -1.0;
    for (int k = 0; k < geom.size(); ++k) {
      if (k <= reference) continue;
      if (std::find(prefix.begin(), prefix.end(), k) != prefix.end()) continue;
      if (angles(reference, k) > th.max_v_th) continue;
      double mvd = 1e9;
      for (int h : prefix) mvd = std::min(mvd, angles(h, k));
      if (mvd > best_mvd) {
        best_mvd = mvd;
        best = k;
      }
    }
    if (best >= 0) CHECK_FALSE(predicate(prefix, best));
  }
}

namespace {

// Reference scene-level sampling: per-track filtering plus the oracle
// match-set builder, assembled the straightforward way.
PairList reference_sample_scene(const SceneModel& scene, const SamplingThresholds& th,
                                const ScaleClamp& clamp) {
  PairList list;
  for (const auto& [track_id, track] : scene.tracks) {
    std::vector<int> kept;
    TrackGeometry geom;
    for (size_t idx = 0; idx < track.observations.size(); ++idx) {
      const Observation& obs = track.observations[idx];
      const ImageView& view = scene.views.at(obs.image_id);
      const double d = depth(track.position, view);
      if (!(d > 0.0)) continue;
      if (obs.scale < clamp.min_scale || obs.scale > clamp.max_scale) continue;
      geom.focal.push_back(scene.cameras.at(view.camera_id).focal_px);
      geom.depth.push_back(d);
      geom.view_dir.push_back(view.viewing_direction);
      kept.push_back(static_cast<int>(idx));
    }
    if (geom.size() == 0) continue;
    const AngleMatrix angles = angle_matrix(geom.view_dir);
    for (int i = 0; i < geom.size(); ++i) {
      const MatchSet set = oracle::oracle_match_set(i, geom, angles, th);
      for (size_t k = 1; k < set.members.size(); ++k) {
        const int j = set.members[k];
        PairRecord rec;
        rec.track_id = track_id;
        rec.a = kept[i];
        rec.b = kept[j];
        rec.angle_deg = angles(i, j);
        rec.scale_ratio =
            scale_ratio(geom.focal[i], geom.depth[i], geom.focal[j], geom.depth[j]);
        list.pairs.push_back(rec);
      }
    }
  }
  std::sort(list.pairs.begin(), list.pairs.end(), [](const PairRecord& x, const PairRecord& y) {
    if (x.track_id != y.track_id) return x.track_id < y.track_id;
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return list;
}

bool same_pairs(const PairList& a, const PairList& b) {
  if (a.pairs.size() != b.pairs.size()) return false;
  for (size_t k = 0; k < a.pairs.size(); ++k) {
    const PairRecord& x = a.pairs[k];
    const PairRecord& y = b.pairs[k];
    if (x.track_id != y.track_id || x.a != y.a || x.b != y.b) return false;
    if (std::abs(x.angle_deg - y.angle_deg) > 1e-12) return false;
    if (std::abs(x.scale_ratio - y.scale_ratio) > 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sample_scene matches the brute-force reference on a 50-track scene") {
  SynthConfig cfg;
  cfg.n_points = 50;
  cfg.n_cameras = 14;
  cfg.elevation_span_deg = 30.0;
  cfg.rng_seed = 151;
  const SceneModel scene = generate_scene(cfg);
  SamplingThresholds th;
  th.max_v_th = 100.0;
  const SceneSampleResult ours = sample_scene(scene, th);
  const PairList ref = reference_sample_scene(scene, th, ScaleClamp{});
  CHECK(same_pairs(ours.pairs, ref));
  CHECK(!ours.pairs.pairs.empty());
}

TEST_CASE("parallel sampling equals serial sampling") {
  SynthConfig cfg;
  cfg.n_points = 80;
  cfg.n_cameras = 10;
  cfg.rng_seed = 161;
  const SceneModel scene = generate_scene(cfg);
  SamplingThresholds th;
  th.max_v_th = 120.0;
  const SceneSampleResult serial = sample_scene(scene, th, ScaleClamp{}, 1);
  const SceneSampleResult parallel = sample_scene(scene, th, ScaleClamp{}, 8);
  CHECK(same_pairs(serial.pairs, parallel.pairs));
  CHECK(serialize_pair_list(serial.pairs) == serialize_pair_list(parallel.pairs));
}

TEST_CASE("single-observation tracks produce no pairs") {
  SynthConfig cfg;
  cfg.n_points = 20;
  cfg.n_cameras = 1;
  cfg.rng_seed = 7;
  const SceneModel scene = generate_scene(cfg);
  const SceneSampleResult result = sample_scene(scene, SamplingThresholds{});
  CHECK(result.pairs.pairs.empty());
}

TEST_CASE("max_v_th = 0 yields no pairs") {
  SynthConfig cfg;
  cfg.n_points = 30;
  cfg.n_cameras = 8;
  cfg.rng_seed = 8;
  const SceneModel scene = generate_scene(cfg);
  SamplingThresholds th;
  th.min_v_th = 0.0;
  th.max_v_th = 0.0;
  const SceneSampleResult result = sample_scene(scene, th);
  CHECK(result.pairs.pairs.empty());
}

TEST_CASE("every emitted pair satisfies the angle and scale constraints") {
  SynthConfig cfg;
  cfg.n_points = 100;
  cfg.n_cameras = 12;
  cfg.rng_seed = 171;
  const SceneModel scene = generate_scene(cfg);
  SamplingThresholds th;  // defaults: sc 2.5, max 50
  const SceneSampleResult result = sample_scene(scene, th);
  for (const PairRecord& rec : result.pairs.pairs) {
    CHECK(rec.angle_deg <= th.max_v_th);
    CHECK(rec.scale_ratio < th.sc_th);
    CHECK(rec.a < rec.b);
  }
}

TEST_CASE("pair output is invariant under track relabeling") {
  SynthConfig cfg;
  cfg.n_points = 40;
  cfg.n_cameras = 8;
  cfg.rng_seed = 181;
  const SceneModel scene = generate_scene(cfg);

  SceneModel relabeled = scene;
  relabeled.tracks.clear();
  for (const auto& [id, track] : scene.tracks) {
    Track copy = track;
    copy.point_id = id + 1000000;
    relabeled.tracks.emplace(copy.point_id, copy);
  }

  SamplingThresholds th;
  th.max_v_th = 100.0;
  const SceneSampleResult base = sample_scene(scene, th);
  const SceneSampleResult shifted = sample_scene(relabeled, th);
  REQUIRE(base.pairs.pairs.size() == shifted.pairs.pairs.size());
  for (size_t k = 0; k < base.pairs.pairs.size(); ++k) {
    CHECK(base.pairs.pairs[k].track_id + 1000000 == shifted.pairs.pairs[k].track_id);
    CHECK(base.pairs.pairs[k].a == shifted.pairs.pairs[k].a);
    CHECK(base.pairs.pairs[k].b == shifted.pairs.pairs[k].b);
  }
}

TEST_CASE("behind-camera and out-of-clamp observations are dropped and counted") {
  SynthConfig cfg;
  cfg.n_points = 30;
  cfg.n_cameras = 6;
  cfg.rng_seed = 191;
  cfg.scale_min = 1.0;  // some observations fall below the default clamp
  cfg.scale_max = 20.0; // and some above
  const SceneModel scene = generate_scene(cfg);
  const SceneSampleResult result = sample_scene(scene, SamplingThresholds{});
  CHECK(result.stats.dropped_scale > 0);
  CHECK(result.stats.observations_kept + result.stats.dropped_scale +
            result.stats.dropped_behind_camera ==
        result.stats.observations_total);
}

TEST_CASE("pair list serialization round-trips") {
  SynthConfig cfg;
  cfg.n_points = 25;
  cfg.n_cameras = 9;
  cfg.rng_seed = 201;
  SamplingThresholds th;
  th.max_v_th = 90.0;
  const SceneSampleResult result = sample_scene(generate_scene(cfg), th);
  const std::string text = serialize_pair_list(result.pairs);
  const PairList parsed = parse_pair_list(text);
  REQUIRE(parsed.pairs.size() == result.pairs.pairs.size());
  for (size_t k = 0; k < parsed.pairs.size(); ++k) {
    CHECK(parsed.pairs[k].track_id == result.pairs.pairs[k].track_id);
    CHECK(parsed.pairs[k].a == result.pairs.pairs[k].a);
    CHECK(parsed.pairs[k].b == result.pairs.pairs[k].b);
    CHECK(parsed.pairs[k].angle_deg == result.pairs.pairs[k].angle_deg);
    CHECK(parsed.pairs[k].scale_ratio == result.pairs.pairs[k].scale_ratio);
  }
}
