#include "psforge/mining.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "psforge/binary_io.hpp"
#include "psforge/errors.hpp"
#include "psforge/geometry.hpp"
#include "psforge/rng.hpp"

namespace psforge {

void validate_batch(const DescriptorBatch& batch) {
  const int m = batch.size();
  if (batch.positives.rows() != m || batch.anchors.cols() != batch.positives.cols()) {
    throw ContractViolation("batch: anchor/positive shape mismatch");
  }
  if (static_cast<int>(batch.anchor_track.size()) != m ||
      static_cast<int>(batch.positive_track.size()) != m) {
    throw ContractViolation("batch: track id count mismatch");
  }
  for (int i = 0; i < m; ++i) {
    if (std::abs(batch.anchors.row(i).norm() - 1.0) > 1e-6 ||
        std::abs(batch.positives.row(i).norm() - 1.0) > 1e-6) {
      throw ContractViolation("batch: descriptors must be L2-normalized");
    }
    if (batch.anchor_track[i] != batch.positive_track[i]) {
      throw ContractViolation("batch: row " + std::to_string(i) +
                              " pairs descriptors from different tracks");
    }
  }
}

ValidityMask full_mask(int m) {
  ValidityMask masks(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      masks.set_a_vs_p(i, j, i != j);
      masks.set_p_vs_a(i, j, i != j);
    }
  }
  return masks;
}

bool valid_negative(const Track& track_p, const Track& track_q, const SceneModel& scene,
                    double crop_side_p, double crop_side_q) {
  if (track_p.point_id == track_q.point_id) return false;
  const std::vector<int> shared = common_images(track_p, track_q);
  if (shared.empty()) return true;
  const double threshold = 0.5 * std::max(crop_side_p, crop_side_q);
  for (int image_id : shared) {
    const ImageView& view = scene.views.at(image_id);
    const CameraIntrinsics& cam = scene.cameras.at(view.camera_id);
    if (!(depth(track_p.position, view) > 0.0) || !(depth(track_q.position, view) > 0.0)) {
      return false;
    }
    const Eigen::Vector2d proj_p = project(track_p.position, view, cam);
    const Eigen::Vector2d proj_q = project(track_q.position, view, cam);
    if ((proj_p - proj_q).norm() <= threshold) return false;
  }
  return true;
}

Eigen::MatrixXd distance_matrix(const DescriptorBatch& batch) {
  validate_batch(batch);
  const int m = batch.size();
  Eigen::MatrixXd d(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      d(i, j) = (batch.anchors.row(i) - batch.positives.row(j)).norm();
    }
  }
  return d;
}

LossResult batch_hard_loss(const Eigen::MatrixXd& distances, const ValidityMask& masks,
                           double margin) {
  if (!(margin > 0.0)) {
    throw ContractViolation("batch_hard_loss: margin must be positive");
  }
  const int m = static_cast<int>(distances.rows());
  if (distances.cols() != m || masks.m != m) {
    throw ContractViolation("batch_hard_loss: distance/mask shape mismatch");
  }

  LossResult result;
  result.hardest_neg_for_anchor.assign(m, std::nullopt);
  result.hardest_neg_for_positive.assign(m, std::nullopt);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    std::optional<int> anchor_side;
    std::optional<int> positive_side;
    for (int j = 0; j < m; ++j) {
      if (masks.a_vs_p(i, j) &&
          (!anchor_side || distances(i, j) < distances(i, *anchor_side))) {
        anchor_side = j;
      }
      if (masks.p_vs_a(i, j) &&
          (!positive_side || distances(j, i) < distances(*positive_side, i))) {
        positive_side = j;
      }
    }
    result.hardest_neg_for_anchor[i] = anchor_side;
    result.hardest_neg_for_positive[i] = positive_side;
    if (!anchor_side && !positive_side) continue;

    double hardest = std::numeric_limits<double>::infinity();
    if (anchor_side) hardest = std::min(hardest, distances(i, *anchor_side));
    if (positive_side) hardest = std::min(hardest, distances(*positive_side, i));
    total += std::max(0.0, margin + distances(i, i) - hardest);
    ++result.active_rows;
  }
  result.loss = result.active_rows > 0 ? total / result.active_rows : 0.0;
  return result;
}

BatchScaffold sample_batch(const PairList& pairs, const std::vector<PatchRecord>& patch_store,
                           const SceneModel& scene, int m, std::uint64_t rng_seed) {
  if (m <= 0) {
    throw ContractViolation("sample_batch: batch size must be positive");
  }

  std::map<point3d_id_t, std::vector<const PairRecord*>> by_track;
  for (const PairRecord& rec : pairs.pairs) by_track[rec.track_id].push_back(&rec);
  if (static_cast<int>(by_track.size()) < m) {
    throw InsufficientDataError("sample_batch: need " + std::to_string(m) +
                                " tracks with pairs, have " + std::to_string(by_track.size()));
  }

  std::map<std::pair<point3d_id_t, int>, double> crop_by_image;
  for (const PatchRecord& rec : patch_store) {
    crop_by_image[{rec.track_id, rec.image_id}] = rec.crop_side_px;
  }
  const auto crop_for = [&](point3d_id_t track_id, int obs_idx) {
    const Track& track = scene.tracks.at(track_id);
    if (obs_idx < 0 || obs_idx >= static_cast<int>(track.observations.size())) {
      throw ContractViolation("sample_batch: pair references observation out of range");
    }
    const int image_id = track.observations[obs_idx].image_id;
    auto it = crop_by_image.find({track_id, image_id});
    if (it == crop_by_image.end()) {
      throw AlignmentError("sample_batch: no patch for point " + std::to_string(track_id) +
                           " in image " + std::to_string(image_id));
    }
    return it->second;
  };

  std::vector<point3d_id_t> track_ids;
  track_ids.reserve(by_track.size());
  for (const auto& [id, recs] : by_track) track_ids.push_back(id);

  // Partial Fisher-Yates: the first m entries are the chosen tracks.
  Rng rng(rng_seed);
  for (int k = 0; k < m; ++k) {
    const size_t pick = k + uniform_index(rng, track_ids.size() - k);
    std::swap(track_ids[k], track_ids[pick]);
  }

  BatchScaffold scaffold;
  scaffold.masks = ValidityMask(m);
  scaffold.items.reserve(m);
  for (int k = 0; k < m; ++k) {
    const point3d_id_t track_id = track_ids[k];
    const std::vector<const PairRecord*>& track_pairs = by_track.at(track_id);
    const PairRecord& pick = *track_pairs[uniform_index(rng, track_pairs.size())];
    BatchItem item;
    item.track_id = track_id;
    item.anchor_idx = pick.a;
    item.positive_idx = pick.b;
    item.anchor_crop = crop_for(track_id, pick.a);
    item.positive_crop = crop_for(track_id, pick.b);
    scaffold.items.push_back(item);
  }

  for (int i = 0; i < m; ++i) {
    const Track& track_i = scene.tracks.at(scaffold.items[i].track_id);
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const Track& track_j = scene.tracks.at(scaffold.items[j].track_id);
      scaffold.masks.set_a_vs_p(
          i, j,
          valid_negative(track_i, track_j, scene, scaffold.items[i].anchor_crop,
                         scaffold.items[j].positive_crop));
      scaffold.masks.set_p_vs_a(
          i, j,
          valid_negative(track_i, track_j, scene, scaffold.items[i].positive_crop,
                         scaffold.items[j].anchor_crop));
    }
  }
  return scaffold;
}

namespace {
constexpr char kDescriptorMagic[4] = {'P', 'S', 'D', 'E'};

void write_bit_rows(std::ostream& out, const std::vector<std::uint8_t>& flags, int m) {
  const int row_bytes = (m + 7) / 8;
  std::vector<char> row(row_bytes);
  for (int i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0);
    for (int j = 0; j < m; ++j) {
      if (flags[static_cast<size_t>(i) * m + j]) {
        row[j / 8] |= static_cast<char>(1 << (j % 8));
      }
    }
    out.write(row.data(), row_bytes);
  }
}

void read_bit_rows(std::istream& in, std::vector<std::uint8_t>* flags, int m,
                   const std::string& what) {
  const int row_bytes = (m + 7) / 8;
  std::vector<unsigned char> row(row_bytes);
  for (int i = 0; i < m; ++i) {
    read_bytes(in, row.data(), row_bytes, what);
    for (int j = 0; j < m; ++j) {
      (*flags)[static_cast<size_t>(i) * m + j] = (row[j / 8] >> (j % 8)) & 1;
    }
  }
}

}  // namespace

void write_descriptor_file(const std::string& path, const Eigen::MatrixXf& descriptors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out.write(kDescriptorMagic, 4);
  write_u64le(out, static_cast<std::uint64_t>(descriptors.rows()));
  write_u32le(out, static_cast<std::uint32_t>(descriptors.cols()));
  for (Eigen::Index i = 0; i < descriptors.rows(); ++i) {
    for (Eigen::Index j = 0; j < descriptors.cols(); ++j) {
      write_f32le(out, descriptors(i, j));
    }
  }
  if (!out) {
    throw Error("write failed for " + path);
  }
}

Eigen::MatrixXf read_descriptor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(path + ": cannot open descriptor file");
  }
  char magic[4];
  read_bytes(in, magic, 4, path + " magic");
  if (!std::equal(magic, magic + 4, kDescriptorMagic)) {
    throw FormatError(path + ": bad magic, not a PSDE descriptor file");
  }
  const std::uint64_t count = read_u64le(in, path + " count");
  const std::uint32_t dim = read_u32le(in, path + " dim");
  Eigen::MatrixXf descriptors(count, dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      descriptors(i, j) = read_f32le(in, path + " row data");
    }
  }
  return descriptors;
}

void write_mask_file(const std::string& path, const ValidityMask& masks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  write_u64le(out, static_cast<std::uint64_t>(masks.m));
  write_bit_rows(out, masks.anchor_vs_positive, masks.m);
  write_bit_rows(out, masks.positive_vs_anchor, masks.m);
  if (!out) {
    throw Error("write failed for " + path);
  }
}

ValidityMask read_mask_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(path + ": cannot open mask file");
  }
  const std::uint64_t m = read_u64le(in, path + " size");
  ValidityMask masks(static_cast<int>(m));
  read_bit_rows(in, &masks.anchor_vs_positive, masks.m, path + " anchor mask");
  read_bit_rows(in, &masks.positive_vs_anchor, masks.m, path + " positive mask");
  return masks;
}

}  // namespace psforge
