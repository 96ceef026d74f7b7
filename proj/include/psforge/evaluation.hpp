#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psforge/scene.hpp"

namespace psforge {

struct ScoredItem {
  double score = 0.0;  // similarity; higher ranks first
  bool relevant = false;
};

// Information-retrieval AP: sort by descending score (stable on ties),
// AP = (1/R) * sum_k precision@k * rel(k).
// Throws DomainError when the list has no relevant item.
double average_precision(const std::vector<ScoredItem>& items);

// Verification protocol: pairs described by their descriptor L2
// distance and a matching/non-matching label; similarity = -distance.
double verification_ap(const std::vector<double>& distances,
                       const std::vector<std::uint8_t>& labels);

// Matching protocol: every reference keypoint predicts its nearest-
// neighbour target descriptor; a prediction is relevant iff the ground
// truth maps the reference id to the predicted target id. Returns the
// AP of the prediction list (0 when no prediction is correct).
// Throws DomainError on an empty ground truth and ContractViolation on
// an empty target set or misaligned ids.
double matching_map(const Eigen::MatrixXd& ref_descriptors,
                    const std::vector<std::int64_t>& ref_ids,
                    const Eigen::MatrixXd& target_descriptors,
                    const std::vector<std::int64_t>& target_ids,
                    const std::map<std::int64_t, std::int64_t>& ground_truth);

struct RetrievalPool {
  Eigen::MatrixXd descriptors;
  std::vector<std::int64_t> ids;
};

// Retrieval protocol: each query is ranked against its relevant pool
// items plus the first N non-relevant ones, for every N in
// distractor_counts (the full pool when empty); reported as the mean AP
// over queries and settings, with equal weights.
double retrieval_map(const Eigen::MatrixXd& queries, const RetrievalPool& pool,
                     const std::vector<std::vector<std::int64_t>>& relevant_ids,
                     const std::vector<int>& distractor_counts);

// Maps a reference-image pixel to the target image through the nearest
// reconstructed 3D point within `radius` pixels (front-facing in both
// views); nullopt when no such point exists.
std::optional<Eigen::Vector2d> transfer_point(const Eigen::Vector2d& p_r,
                                              const ImageView& ref_view,
                                              const ImageView& target_view,
                                              const SceneModel& scene, double radius = 3.0);

enum class BaselineCategory { kNarrow, kWide, kVeryWide };

const char* baseline_name(BaselineCategory category);

struct BaselineResult {
  BaselineCategory category = BaselineCategory::kNarrow;
  bool out_of_range = false;  // angle beyond 130 degrees
};

// Narrow [0, 30), Wide [30, 75), Very-Wide [75, 130]; boundaries belong
// to the higher category. Angles beyond 130 are flagged, not dropped.
// Requires angle in [0, 180].
BaselineResult categorize_baseline(double angle_deg);

struct PairEvalResult {
  int image_a = -1;
  int image_b = -1;
  double angle_deg = 0.0;
  BaselineCategory category = BaselineCategory::kNarrow;
  bool out_of_range = false;
  int n_points = 0;
  double ap = 0.0;
  bool skipped = false;  // no co-visible points
};

struct EvalReport {
  std::string task;
  double overall_map = 0.0;
  std::map<std::string, double> category_map;
  std::map<std::string, int> category_pairs;
  std::vector<PairEvalResult> pairs;
  int skipped_pairs = 0;
  int out_of_range_pairs = 0;

  std::string to_json() const;
  std::string to_text_table() const;
};

// A transferred keypoint: the 3D track it came from and its pixel
// position in the image at hand.
struct TransferredKeypoint {
  point3d_id_t track_id = -1;
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
};

// Canonical keypoint list of an image for the wide-baseline protocol:
// every track visible in the reference image whose reference projection
// transfers into `image_id` (in bounds, in front of the camera), sorted
// by track id. Descriptor files for this protocol align with this list.
std::vector<TransferredKeypoint> strecha_keypoints(const SceneModel& scene, int ref_image_id,
                                                   int image_id);

// Wide-baseline point-transfer evaluation: per image pair, up to
// n_points co-visible transferred keypoints are sampled (seeded) and
// matched between the two images; APs aggregate per baseline category.
// Descriptors are indexed per image, rows aligned with
// strecha_keypoints(). Pairs without co-visible points are skipped with
// a note in the report.
EvalReport strecha_protocol(const SceneModel& scene, int ref_image_id,
                            const std::vector<std::pair<int, int>>& image_pairs,
                            const std::map<int, Eigen::MatrixXf>& descriptors_per_image,
                            int n_points = 2000, std::uint64_t rng_seed = 0);

}  // namespace psforge
