#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "psforge/errors.hpp"
#include "psforge/mining.hpp"
#include "psforge/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace psforge;

namespace {

DescriptorBatch random_batch(Rng& rng, int m, int dim) {
  DescriptorBatch batch;
  batch.anchors.resize(m, dim);
  batch.positives.resize(m, dim);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < dim; ++j) {
      batch.anchors(i, j) = uniform_range(rng, -1.0, 1.0);
      batch.positives(i, j) = uniform_range(rng, -1.0, 1.0);
    }
    batch.anchors.row(i).normalize();
    batch.positives.row(i).normalize();
    batch.anchor_track.push_back(i + 1);
    batch.positive_track.push_back(i + 1);
  }
  return batch;
}

ValidityMask random_mask(Rng& rng, int m, double density) {
  ValidityMask masks(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      masks.set_a_vs_p(i, j, uniform_unit(rng) < density);
      masks.set_p_vs_a(i, j, uniform_unit(rng) < density);
    }
  }
  return masks;
}

// Two-camera scene with two world points whose projections in both
// images are `separation_px` apart horizontally.
SceneModel separation_scene(double separation_px) {
  SceneModel scene;
  const double f = 100.0;
  const double z = 10.0;
  scene.cameras.emplace(1, testing::make_camera(1, f, 1000, 1000));
  scene.cameras.emplace(2, testing::make_camera(2, f, 1000, 1000));
  scene.views.emplace(1, testing::make_lookat_view(1, 1, Eigen::Vector3d(0, 0, -10),
                                                   Eigen::Vector3d(0, 0, 1)));
  scene.views.emplace(2, testing::make_lookat_view(2, 2, Eigen::Vector3d(0.5, 0, -10),
                                                   Eigen::Vector3d(0.5, 0, 1)));

  const double dx = separation_px * (z + 10.0) / f;
  const auto add_track = [&scene, z](point3d_id_t id, double x) {
    Track track;
    track.point_id = id;
    track.position = Eigen::Vector3d(x, 0, z);
    for (int image_id : {1, 2}) {
      const ImageView& view = scene.views.at(image_id);
      Observation obs;
      obs.image_id = image_id;
      obs.xy = project(track.position, view, scene.cameras.at(view.camera_id));
      obs.scale = 10.7;  // crop side 128
      track.observations.push_back(obs);
    }
    scene.tracks.emplace(id, track);
  };
  add_track(1, 0.0);
  add_track(2, dx);
  validate_scene(scene);
  return scene;
}

}  // namespace

TEST_CASE("distance_matrix equals unit-vector geometry") {
  DescriptorBatch batch;
  batch.anchors = Eigen::MatrixXd::Identity(3, 3);
  batch.positives = Eigen::MatrixXd::Identity(3, 3);
  batch.anchor_track = {1, 2, 3};
  batch.positive_track = {1, 2, 3};
  const Eigen::MatrixXd d = distance_matrix(batch);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(d(i, j) == doctest::Approx(i == j ? 0.0 : std::sqrt(2.0)));
    }
  }
}

TEST_CASE("distance_matrix m=1") {
  Rng rng(3);
  const DescriptorBatch batch = random_batch(rng, 1, 16);
  const Eigen::MatrixXd d = distance_matrix(batch);
  CHECK(d(0, 0) ==
        doctest::Approx((batch.anchors.row(0) - batch.positives.row(0)).norm()).epsilon(1e-12));
}

TEST_CASE("distance_matrix matches the naive double loop") {
  Rng rng(5);
  const DescriptorBatch batch = random_batch(rng, 37, 64);
  const Eigen::MatrixXd d = distance_matrix(batch);
  for (int i = 0; i < batch.size(); ++i) {
    for (int j = 0; j < batch.size(); ++j) {
      double sum = 0.0;
      for (int k = 0; k < 64; ++k) {
        const double diff = batch.anchors(i, k) - batch.positives(j, k);
        sum += diff * diff;
      }
      REQUIRE(d(i, j) == doctest::Approx(std::sqrt(sum)).epsilon(1e-9));
    }
  }
}

TEST_CASE("unnormalized batches are rejected") {
  Rng rng(6);
  DescriptorBatch batch = random_batch(rng, 4, 8);
  batch.anchors.row(2) *= 2.0;
  CHECK_THROWS_AS(distance_matrix(batch), ContractViolation);
}

TEST_CASE("batch_hard_loss hand fixtures") {
  SUBCASE("satisfied margin gives zero loss") {
    Eigen::MatrixXd d(2, 2);
    d << 0, 2, 2, 0;
    const LossResult result = batch_hard_loss(d, full_mask(2), 1.0);
    CHECK(result.loss == doctest::Approx(0.0));
    CHECK(result.active_rows == 2);
  }
  SUBCASE("worked 0.85 fixture") {
    Eigen::MatrixXd d(2, 2);
    d << 0.5, 0.6, 0.7, 0.4;
    const LossResult result = batch_hard_loss(d, full_mask(2), 1.0);
    CHECK(result.loss == doctest::Approx(0.85).epsilon(1e-9));
    REQUIRE(result.hardest_neg_for_anchor[0].has_value());
    CHECK(*result.hardest_neg_for_anchor[0] == 1);
    REQUIRE(result.hardest_neg_for_positive[0].has_value());
    CHECK(*result.hardest_neg_for_positive[0] == 1);
  }
  SUBCASE("all-false masks give zero loss and zero active rows") {
    Eigen::MatrixXd d(3, 3);
    d.setConstant(0.5);
    const LossResult result = batch_hard_loss(d, ValidityMask(3), 1.0);
    CHECK(result.loss == 0.0);
    CHECK(result.active_rows == 0);
    for (int i = 0; i < 3; ++i) {
      CHECK_FALSE(result.hardest_neg_for_anchor[i].has_value());
      CHECK_FALSE(result.hardest_neg_for_positive[i].has_value());
    }
  }
  SUBCASE("non-positive margin is rejected") {
    Eigen::MatrixXd d(1, 1);
    d.setZero();
    CHECK_THROWS_AS(batch_hard_loss(d, full_mask(1), 0.0), ContractViolation);
  }
}

TEST_CASE("one-sided masks exclude the missing side from the inner min") {
  Eigen::MatrixXd d(2, 2);
  d << 0.5, 0.6, 0.7, 0.4;
  ValidityMask masks(2);
  masks.set_a_vs_p(0, 1, true);  // row 0: anchor side only -> neg 0.6
  masks.set_p_vs_a(1, 0, true);  // row 1: positive side only -> D(0,1) = 0.6
  const LossResult result = batch_hard_loss(d, masks, 1.0);
  CHECK(result.loss == doctest::Approx(0.5 * ((1.0 + 0.5 - 0.6) + (1.0 + 0.4 - 0.6))));
  CHECK(result.active_rows == 2);
}

TEST_CASE("loss equals the naive oracle on random batches") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + static_cast<int>(uniform_index(rng, 64));
    const DescriptorBatch batch = random_batch(rng, m, 32);
    const Eigen::MatrixXd d = distance_matrix(batch);
    const ValidityMask masks = random_mask(rng, m, uniform_unit(rng));
    const double margin = uniform_range(rng, 0.1, 2.0);
    const LossResult ours = batch_hard_loss(d, masks, margin);
    CHECK(ours.loss == doctest::Approx(oracle::oracle_loss(d, masks, margin)).epsilon(1e-9));
  }
}

TEST_CASE("loss is zero when margin plus positives stay below valid negatives") {
  Rng rng(8);
  const int m = 24;
  DescriptorBatch batch = random_batch(rng, m, 16);
  Eigen::MatrixXd d = distance_matrix(batch);
  // Force a comfortable gap: shrink the diagonal, inflate the rest.
  double max_pos = 0.0;
  for (int i = 0; i < m; ++i) {
    d(i, i) *= 0.01;
    max_pos = std::max(max_pos, d(i, i));
  }
  double min_neg = 1e9;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      d(i, j) += 3.0;
      min_neg = std::min(min_neg, d(i, j));
    }
  }
  const double margin = 0.5 * (min_neg - max_pos);
  REQUIRE(margin + max_pos <= min_neg);
  CHECK(batch_hard_loss(d, full_mask(m), margin).loss == 0.0);
}

TEST_CASE("loss is monotone in the margin") {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + static_cast<int>(uniform_index(rng, 32));
    const DescriptorBatch batch = random_batch(rng, m, 24);
    const Eigen::MatrixXd d = distance_matrix(batch);
    const ValidityMask masks = random_mask(rng, m, 0.7);
    double prev = -1.0;
    for (double margin : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const double loss = batch_hard_loss(d, masks, margin).loss;
      CHECK(loss >= prev);
      prev = loss;
    }
  }
}

TEST_CASE("valid_negative") {
  SUBCASE("same track is never valid") {
    const SceneModel scene = separation_scene(100.0);
    const Track& track = scene.tracks.at(1);
    CHECK_FALSE(valid_negative(track, track, scene, 20, 20));
  }
  SUBCASE("tracks with no common image are valid") {
    SceneModel scene = separation_scene(100.0);
    // Restrict track 1 to image 1 and track 2 to image 2.
    scene.tracks.at(1).observations.resize(1);
    scene.tracks.at(2).observations.erase(scene.tracks.at(2).observations.begin());
    CHECK(valid_negative(scene.tracks.at(1), scene.tracks.at(2), scene, 128, 128));
  }
  SUBCASE("10 px apart with crop 128 fails the 50% rule") {
    const SceneModel scene = separation_scene(10.0);
    CHECK_FALSE(valid_negative(scene.tracks.at(1), scene.tracks.at(2), scene, 128, 128));
    // The same separation passes once the patches are small enough.
    CHECK(valid_negative(scene.tracks.at(1), scene.tracks.at(2), scene, 19, 19));
  }
  SUBCASE("comfortably separated projections are valid") {
    const SceneModel scene = separation_scene(100.0);
    CHECK(valid_negative(scene.tracks.at(1), scene.tracks.at(2), scene, 128, 128));
  }
  SUBCASE("threshold uses the larger crop and is strict") {
    const SceneModel scene = separation_scene(64.0);
    const Track& p = scene.tracks.at(1);
    const Track& q = scene.tracks.at(2);
    const double separation =
        (p.observations[0].xy - q.observations[0].xy).norm();
    // crop chosen so the threshold equals the separation exactly:
    // "differ by 50%" must be strictly greater, so equality fails.
    CHECK_FALSE(valid_negative(p, q, scene, 2.0 * separation, 20));
    CHECK(valid_negative(p, q, scene, 1.9 * separation, 20));
  }
  SUBCASE("a point behind the camera in a common image invalidates the pair") {
    SceneModel scene = separation_scene(100.0);
    scene.tracks.at(2).position.z() = -20.0;  // behind both cameras
    CHECK_FALSE(valid_negative(scene.tracks.at(1), scene.tracks.at(2), scene, 20, 20));
  }
}

TEST_CASE("sample_batch") {
  SynthConfig cfg;
  cfg.n_points = 40;
  cfg.n_cameras = 10;
  cfg.elevation_span_deg = 30.0;
  cfg.rng_seed = 303;
  const SceneModel scene = generate_scene(cfg);
  SamplingThresholds th;
  th.max_v_th = 100.0;
  const SceneSampleResult sampled = sample_scene(scene, th);

  std::vector<PatchRecord> store;
  for (const auto& [track_id, sample] : sampled.tracks) {
    const Track& track = scene.tracks.at(track_id);
    for (int idx : sample.kept_indices) {
      PatchRecord rec;
      rec.track_id = track_id;
      rec.image_id = track.observations[idx].image_id;
      rec.crop_side_px = clamp_crop_side(track.observations[idx].scale);
      store.push_back(rec);
    }
  }

  std::set<point3d_id_t> tracks_with_pairs;
  for (const PairRecord& rec : sampled.pairs.pairs) tracks_with_pairs.insert(rec.track_id);
  const int available = static_cast<int>(tracks_with_pairs.size());
  REQUIRE(available >= 4);

  SUBCASE("every track used exactly once when m equals availability") {
    const BatchScaffold scaffold = sample_batch(sampled.pairs, store, scene, available, 17);
    std::set<point3d_id_t> used;
    for (const BatchItem& item : scaffold.items) used.insert(item.track_id);
    CHECK(used == tracks_with_pairs);
  }
  SUBCASE("fixed seed reproduces the batch") {
    const BatchScaffold a = sample_batch(sampled.pairs, store, scene, available / 2, 99);
    const BatchScaffold b = sample_batch(sampled.pairs, store, scene, available / 2, 99);
    REQUIRE(a.items.size() == b.items.size());
    for (size_t k = 0; k < a.items.size(); ++k) {
      CHECK(a.items[k].track_id == b.items[k].track_id);
      CHECK(a.items[k].anchor_idx == b.items[k].anchor_idx);
      CHECK(a.items[k].positive_idx == b.items[k].positive_idx);
    }
    CHECK(a.masks.anchor_vs_positive == b.masks.anchor_vs_positive);
    CHECK(a.masks.positive_vs_anchor == b.masks.positive_vs_anchor);
  }
  SUBCASE("mask diagonal is false") {
    const BatchScaffold scaffold = sample_batch(sampled.pairs, store, scene, available, 5);
    for (int i = 0; i < scaffold.masks.m; ++i) {
      CHECK_FALSE(scaffold.masks.a_vs_p(i, i));
      CHECK_FALSE(scaffold.masks.p_vs_a(i, i));
    }
  }
  SUBCASE("asking for more tracks than available fails") {
    CHECK_THROWS_AS(sample_batch(sampled.pairs, store, scene, available + 1, 1),
                    InsufficientDataError);
  }
  SUBCASE("items reference pairs sampled for their track") {
    const BatchScaffold scaffold = sample_batch(sampled.pairs, store, scene, available, 23);
    for (const BatchItem& item : scaffold.items) {
      const bool found = std::any_of(
          sampled.pairs.pairs.begin(), sampled.pairs.pairs.end(), [&item](const PairRecord& rec) {
            return rec.track_id == item.track_id && rec.a == item.anchor_idx &&
                   rec.b == item.positive_idx;
          });
      CHECK(found);
    }
  }
}
