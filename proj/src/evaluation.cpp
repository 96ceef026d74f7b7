#include "psforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "psforge/errors.hpp"
#include "psforge/geometry.hpp"
#include "psforge/rng.hpp"

namespace psforge {

double average_precision(const std::vector<ScoredItem>& items) {
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&items](int a, int b) { return items[a].score > items[b].score; });

  int relevant_total = 0;
  for (const ScoredItem& item : items) relevant_total += item.relevant ? 1 : 0;
  if (relevant_total == 0) {
    throw DomainError("average_precision undefined: no relevant items");
  }

  double sum = 0.0;
  int hits = 0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (items[order[rank]].relevant) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / relevant_total;
}

double verification_ap(const std::vector<double>& distances,
                       const std::vector<std::uint8_t>& labels) {
  if (distances.size() != labels.size()) {
    throw ContractViolation("verification_ap: distance/label count mismatch");
  }
  std::vector<ScoredItem> items(distances.size());
  for (size_t k = 0; k < distances.size(); ++k) {
    items[k].score = -distances[k];
    items[k].relevant = labels[k] != 0;
  }
  return average_precision(items);
}

double matching_map(const Eigen::MatrixXd& ref_descriptors,
                    const std::vector<std::int64_t>& ref_ids,
                    const Eigen::MatrixXd& target_descriptors,
                    const std::vector<std::int64_t>& target_ids,
                    const std::map<std::int64_t, std::int64_t>& ground_truth) {
  if (ref_descriptors.rows() != static_cast<Eigen::Index>(ref_ids.size()) ||
      target_descriptors.rows() != static_cast<Eigen::Index>(target_ids.size())) {
    throw ContractViolation("matching_map: descriptor/id count mismatch");
  }
  if (target_ids.empty()) {
    throw ContractViolation("matching_map: empty target set");
  }
  if (ground_truth.empty()) {
    throw DomainError("matching_map: empty ground truth");
  }

  std::vector<ScoredItem> predictions(ref_ids.size());
  for (Eigen::Index i = 0; i < ref_descriptors.rows(); ++i) {
    Eigen::Index best = 0;
    double best_dist = (ref_descriptors.row(i) - target_descriptors.row(0)).norm();
    for (Eigen::Index j = 1; j < target_descriptors.rows(); ++j) {
      const double dist = (ref_descriptors.row(i) - target_descriptors.row(j)).norm();
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    predictions[i].score = -best_dist;
    auto gt = ground_truth.find(ref_ids[i]);
    predictions[i].relevant = gt != ground_truth.end() && gt->second == target_ids[best];
  }

  const bool any_relevant =
      std::any_of(predictions.begin(), predictions.end(),
                  [](const ScoredItem& item) { return item.relevant; });
  if (!any_relevant) return 0.0;
  return average_precision(predictions);
}

double retrieval_map(const Eigen::MatrixXd& queries, const RetrievalPool& pool,
                     const std::vector<std::vector<std::int64_t>>& relevant_ids,
                     const std::vector<int>& distractor_counts) {
  if (queries.rows() != static_cast<Eigen::Index>(relevant_ids.size())) {
    throw ContractViolation("retrieval_map: query/relevance count mismatch");
  }
  if (pool.descriptors.rows() != static_cast<Eigen::Index>(pool.ids.size())) {
    throw ContractViolation("retrieval_map: pool descriptor/id count mismatch");
  }

  std::vector<int> counts = distractor_counts;
  if (counts.empty()) counts.push_back(static_cast<int>(pool.ids.size()));

  double total = 0.0;
  int settings = 0;
  for (int distractors : counts) {
    double per_query_sum = 0.0;
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      const std::set<std::int64_t> relevant(relevant_ids[q].begin(), relevant_ids[q].end());
      if (relevant.empty()) {
        throw DomainError("retrieval_map: query " + std::to_string(q) +
                          " has no relevant items");
      }
      std::vector<ScoredItem> ranked;
      ranked.reserve(pool.ids.size());
      int used_distractors = 0;
      bool saw_relevant = false;
      for (Eigen::Index p = 0; p < pool.descriptors.rows(); ++p) {
        const bool is_relevant = relevant.count(pool.ids[p]) > 0;
        if (!is_relevant) {
          if (used_distractors >= distractors) continue;
          ++used_distractors;
        } else {
          saw_relevant = true;
        }
        ScoredItem item;
        item.score = -(queries.row(q) - pool.descriptors.row(p)).norm();
        item.relevant = is_relevant;
        ranked.push_back(item);
      }
      if (!saw_relevant) {
        throw DomainError("retrieval_map: relevant ids of query " + std::to_string(q) +
                          " not present in pool");
      }
      per_query_sum += average_precision(ranked);
    }
    total += per_query_sum / static_cast<double>(queries.rows());
    ++settings;
  }
  return total / settings;
}

std::optional<Eigen::Vector2d> transfer_point(const Eigen::Vector2d& p_r,
                                              const ImageView& ref_view,
                                              const ImageView& target_view,
                                              const SceneModel& scene, double radius) {
  const CameraIntrinsics& ref_cam = scene.cameras.at(ref_view.camera_id);
  const Track* nearest = nullptr;
  double nearest_dist = radius;
  for (const auto& [id, track] : scene.tracks) {
    if (!(depth(track.position, ref_view) > 0.0)) continue;
    const Eigen::Vector2d proj = project(track.position, ref_view, ref_cam);
    const double dist = (proj - p_r).norm();
    if (dist <= nearest_dist && (nearest == nullptr || dist < nearest_dist)) {
      nearest_dist = dist;
      nearest = &track;
    }
  }
  if (nearest == nullptr) return std::nullopt;
  if (!(depth(nearest->position, target_view) > 0.0)) return std::nullopt;
  return project(nearest->position, target_view, scene.cameras.at(target_view.camera_id));
}

const char* baseline_name(BaselineCategory category) {
  switch (category) {
    case BaselineCategory::kNarrow:
      return "narrow";
    case BaselineCategory::kWide:
      return "wide";
    case BaselineCategory::kVeryWide:
      return "very_wide";
  }
  return "unknown";
}

BaselineResult categorize_baseline(double angle_deg) {
  if (angle_deg < 0.0 || angle_deg > 180.0) {
    throw ContractViolation("categorize_baseline: angle must be in [0, 180]");
  }
  BaselineResult result;
  if (angle_deg < 30.0) {
    result.category = BaselineCategory::kNarrow;
  } else if (angle_deg < 75.0) {
    result.category = BaselineCategory::kWide;
  } else if (angle_deg <= 130.0) {
    result.category = BaselineCategory::kVeryWide;
  } else {
    result.category = BaselineCategory::kVeryWide;
    result.out_of_range = true;
  }
  return result;
}

std::vector<TransferredKeypoint> strecha_keypoints(const SceneModel& scene, int ref_image_id,
                                                   int image_id) {
  const ImageView& ref_view = scene.views.at(ref_image_id);
  const ImageView& target_view = scene.views.at(image_id);
  const CameraIntrinsics& ref_cam = scene.cameras.at(ref_view.camera_id);
  const CameraIntrinsics& target_cam = scene.cameras.at(target_view.camera_id);

  std::vector<TransferredKeypoint> keypoints;
  for (const auto& [id, track] : scene.tracks) {
    if (!(depth(track.position, ref_view) > 0.0)) continue;
    const Eigen::Vector2d ref_proj = project(track.position, ref_view, ref_cam);
    if (ref_proj.x() < 0.0 || ref_proj.x() > ref_cam.width || ref_proj.y() < 0.0 ||
        ref_proj.y() > ref_cam.height) {
      continue;
    }
    if (!(depth(track.position, target_view) > 0.0)) continue;
    const Eigen::Vector2d proj = project(track.position, target_view, target_cam);
    if (proj.x() < 0.0 || proj.x() > target_cam.width || proj.y() < 0.0 ||
        proj.y() > target_cam.height) {
      continue;
    }
    TransferredKeypoint kp;
    kp.track_id = id;
    kp.xy = proj;
    keypoints.push_back(kp);
  }
  return keypoints;  // tracks map is ordered, so this is sorted by id
}

EvalReport strecha_protocol(const SceneModel& scene, int ref_image_id,
                            const std::vector<std::pair<int, int>>& image_pairs,
                            const std::map<int, Eigen::MatrixXf>& descriptors_per_image,
                            int n_points, std::uint64_t rng_seed) {
  EvalReport report;
  report.task = "strecha";

  std::map<std::string, double> category_sum;
  std::map<std::string, int> category_count;
  double overall_sum = 0.0;
  int overall_count = 0;

  for (const auto& [image_a, image_b] : image_pairs) {
    PairEvalResult pair_result;
    pair_result.image_a = image_a;
    pair_result.image_b = image_b;

    const ImageView& view_a = scene.views.at(image_a);
    const ImageView& view_b = scene.views.at(image_b);
    pair_result.angle_deg = angle_between(view_a.viewing_direction, view_b.viewing_direction);
    const BaselineResult baseline = categorize_baseline(pair_result.angle_deg);
    pair_result.category = baseline.category;
    pair_result.out_of_range = baseline.out_of_range;
    if (baseline.out_of_range) ++report.out_of_range_pairs;

    const std::vector<TransferredKeypoint> kps_a = strecha_keypoints(scene, ref_image_id, image_a);
    const std::vector<TransferredKeypoint> kps_b = strecha_keypoints(scene, ref_image_id, image_b);

    // Tracks transferable into both images of the pair.
    std::vector<point3d_id_t> common;
    {
      size_t ia = 0, ib = 0;
      while (ia < kps_a.size() && ib < kps_b.size()) {
        if (kps_a[ia].track_id < kps_b[ib].track_id) {
          ++ia;
        } else if (kps_b[ib].track_id < kps_a[ia].track_id) {
          ++ib;
        } else {
          common.push_back(kps_a[ia].track_id);
          ++ia;
          ++ib;
        }
      }
    }

    if (common.empty()) {
      pair_result.skipped = true;
      ++report.skipped_pairs;
      report.pairs.push_back(pair_result);
      continue;
    }

    if (static_cast<int>(common.size()) > n_points) {
      // Per-pair derived stream keeps the sampling independent of the
      // pair list order.
      Rng rng(rng_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(image_a) * 8191 +
                                                   static_cast<std::uint64_t>(image_b) + 1)));
      for (int k = 0; k < n_points; ++k) {
        const size_t pick = k + uniform_index(rng, common.size() - k);
        std::swap(common[k], common[pick]);
      }
      common.resize(n_points);
      std::sort(common.begin(), common.end());
    }
    pair_result.n_points = static_cast<int>(common.size());

    const auto desc_a_it = descriptors_per_image.find(image_a);
    const auto desc_b_it = descriptors_per_image.find(image_b);
    if (desc_a_it == descriptors_per_image.end() || desc_b_it == descriptors_per_image.end()) {
      throw AlignmentError("strecha_protocol: missing descriptors for image pair " +
                           std::to_string(image_a) + "-" + std::to_string(image_b));
    }
    const auto gather = [](const std::vector<TransferredKeypoint>& kps,
                           const Eigen::MatrixXf& desc, const std::vector<point3d_id_t>& wanted,
                           int image_id) {
      if (desc.rows() != static_cast<Eigen::Index>(kps.size())) {
        throw AlignmentError("strecha_protocol: image " + std::to_string(image_id) + " has " +
                             std::to_string(desc.rows()) + " descriptor rows for " +
                             std::to_string(kps.size()) + " keypoints");
      }
      Eigen::MatrixXd out(wanted.size(), desc.cols());
      size_t cursor = 0;
      for (size_t k = 0; k < kps.size() && cursor < wanted.size(); ++k) {
        if (kps[k].track_id == wanted[cursor]) {
          out.row(cursor) = desc.row(k).cast<double>();
          ++cursor;
        }
      }
      return out;
    };
    const Eigen::MatrixXd desc_a = gather(kps_a, desc_a_it->second, common, image_a);
    const Eigen::MatrixXd desc_b = gather(kps_b, desc_b_it->second, common, image_b);

    std::map<std::int64_t, std::int64_t> ground_truth;
    for (point3d_id_t id : common) ground_truth[id] = id;
    pair_result.ap = matching_map(desc_a, common, desc_b, common, ground_truth);

    category_sum[baseline_name(baseline.category)] += pair_result.ap;
    category_count[baseline_name(baseline.category)] += 1;
    overall_sum += pair_result.ap;
    ++overall_count;
    report.pairs.push_back(pair_result);
  }

  for (const auto& [name, count] : category_count) {
    report.category_pairs[name] = count;
    report.category_map[name] = category_sum[name] / count;
  }
  report.overall_map = overall_count > 0 ? overall_sum / overall_count : 0.0;
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["overall_map"] = overall_map;
  j["categories"] = nlohmann::json::object();
  for (const auto& [name, value] : category_map) {
    j["categories"][name] = {{"map", value}, {"pairs", category_pairs.at(name)}};
  }
  if (!pairs.empty()) {
    j["pairs"] = nlohmann::json::array();
    for (const PairEvalResult& pair : pairs) {
      nlohmann::json entry = {{"image_a", pair.image_a},     {"image_b", pair.image_b},
                              {"angle_deg", pair.angle_deg}, {"category", baseline_name(pair.category)},
                              {"n_points", pair.n_points},   {"ap", pair.ap},
                              {"skipped", pair.skipped}};
      if (pair.out_of_range) entry["out_of_range"] = true;
      j["pairs"].push_back(entry);
    }
  }
  j["skipped_pairs"] = skipped_pairs;
  j["out_of_range_pairs"] = out_of_range_pairs;
  return j.dump(2) + "\n";
}

std::string EvalReport::to_text_table() const {
  static const char* kColumns[] = {"narrow", "wide", "very_wide"};
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s %10s\n", ("task: " + task).c_str(),
                "Narrow", "Wide", "Very-Wide", "Mean");
  out += buf;
  std::string map_row, pair_row;
  std::snprintf(buf, sizeof(buf), "%-12s", "mAP");
  map_row += buf;
  std::snprintf(buf, sizeof(buf), "%-12s", "pairs");
  pair_row += buf;
  for (const char* name : kColumns) {
    auto map_it = category_map.find(name);
    if (map_it != category_map.end()) {
      std::snprintf(buf, sizeof(buf), " %10.4f", map_it->second);
      map_row += buf;
      std::snprintf(buf, sizeof(buf), " %10d", category_pairs.at(name));
      pair_row += buf;
    } else {
      std::snprintf(buf, sizeof(buf), " %10s", "n/a");
      map_row += buf;
      std::snprintf(buf, sizeof(buf), " %10d", 0);
      pair_row += buf;
    }
  }
  std::snprintf(buf, sizeof(buf), " %10.4f\n", overall_map);
  map_row += buf;
  pair_row += "\n";
  out += map_row;
  out += pair_row;
  if (skipped_pairs > 0) {
    std::snprintf(buf, sizeof(buf), "skipped pairs: %d\n", skipped_pairs);
    out += buf;
  }
  if (out_of_range_pairs > 0) {
    std::snprintf(buf, sizeof(buf), "pairs beyond 130 degrees: %d\n", out_of_range_pairs);
    out += buf;
  }
  return out;
}

}  // namespace psforge
