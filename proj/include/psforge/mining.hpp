#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psforge/patch.hpp"
#include "psforge/sampler.hpp"
#include "psforge/scene.hpp"

namespace psforge {

// m anchor/positive descriptor pairs; rows are L2-normalized and
// anchor_track[i] == positive_track[i].
struct DescriptorBatch {
  Eigen::MatrixXd anchors;    // m x D
  Eigen::MatrixXd positives;  // m x D
  std::vector<point3d_id_t> anchor_track;
  std::vector<point3d_id_t> positive_track;

  int size() const { return static_cast<int>(anchors.rows()); }
};

void validate_batch(const DescriptorBatch& batch);

// Per-row validity of cross-pair negatives. anchor_vs_positive(i, j)
// says b_j may serve as a negative for a_i; positive_vs_anchor(i, k)
// says a_k may serve as a negative for b_i. Diagonals are always false.
struct ValidityMask {
  int m = 0;
  std::vector<std::uint8_t> anchor_vs_positive;
  std::vector<std::uint8_t> positive_vs_anchor;

  explicit ValidityMask(int size = 0)
      : m(size),
        anchor_vs_positive(static_cast<size_t>(size) * size, 0),
        positive_vs_anchor(static_cast<size_t>(size) * size, 0) {}

  bool a_vs_p(int i, int j) const { return anchor_vs_positive[static_cast<size_t>(i) * m + j]; }
  bool p_vs_a(int i, int k) const { return positive_vs_anchor[static_cast<size_t>(i) * m + k]; }
  void set_a_vs_p(int i, int j, bool v) {
    anchor_vs_positive[static_cast<size_t>(i) * m + j] = v;
  }
  void set_p_vs_a(int i, int k, bool v) {
    positive_vs_anchor[static_cast<size_t>(i) * m + k] = v;
  }
};

// Full mask with the diagonal cleared; handy for tests.
ValidityMask full_mask(int m);

struct LossResult {
  double loss = 0.0;
  std::vector<std::optional<int>> hardest_neg_for_anchor;
  std::vector<std::optional<int>> hardest_neg_for_positive;
  int active_rows = 0;
};

// Two patches from different tracks form a usable negative pair unless
// some image seeing both 3D points shows them closer than 50% of the
// larger un-normalized patch size. Tracks sharing no image are valid
// negatives. A point behind the camera in a common image makes the pair
// invalid (separation cannot be established).
bool valid_negative(const Track& track_p, const Track& track_q, const SceneModel& scene,
                    double crop_side_p, double crop_side_q);

// D(i, j) = ||anchors[i] - positives[j]||_2.
Eigen::MatrixXd distance_matrix(const DescriptorBatch& batch);

// Hardest-in-batch margin loss. Per row, the positive distance is
// D(i, i) and the hardest negative is the smallest mask-true entry of
// row i (anchor side) and of column i (positive side); a side with no
// valid entry is excluded from the inner min, and rows with neither side
// are skipped. The loss is the mean over active rows (0 if none).
// Throws ContractViolation for margin <= 0 or shape mismatches.
LossResult batch_hard_loss(const Eigen::MatrixXd& distances, const ValidityMask& masks,
                           double margin);

// One sampled training batch before descriptor extraction: per item the
// (anchor, positive) patch indices of one track, plus validity masks.
struct BatchItem {
  point3d_id_t track_id = -1;
  int anchor_idx = 0;    // observation index within the track
  int positive_idx = 0;
  double anchor_crop = 0.0;
  double positive_crop = 0.0;
};

struct BatchScaffold {
  std::vector<BatchItem> items;
  ValidityMask masks;
};

// Samples m distinct tracks (uniform, seeded) and one pair from each
// track's pair list, then fills the masks via valid_negative.
// Throws InsufficientDataError if fewer than m tracks have pairs and
// AlignmentError if a referenced patch is missing from the store.
BatchScaffold sample_batch(const PairList& pairs, const std::vector<PatchRecord>& patch_store,
                           const SceneModel& scene, int m, std::uint64_t rng_seed);

// PSDE container: magic "PSDE", count u64, dim u32, then f32 rows.
void write_descriptor_file(const std::string& path, const Eigen::MatrixXf& descriptors);
Eigen::MatrixXf read_descriptor_file(const std::string& path);

// Mask container: m as u64, then LSB-first packed bit rows, the
// anchor-vs-positive plane followed by the positive-vs-anchor plane.
void write_mask_file(const std::string& path, const ValidityMask& masks);
ValidityMask read_mask_file(const std::string& path);

}  // namespace psforge
