#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psforge/image.hpp"
#include "psforge/rng.hpp"
#include "psforge/scene.hpp"

namespace psforge {

inline constexpr int kPatchSize = 48;       // stored patch side
inline constexpr int kCropSize = 32;        // training crop side
inline constexpr double kCropScale = 12.0;  // crop side = 12 * feature scale
inline constexpr double kCropSideMin = 20.0;
inline constexpr double kCropSideMax = 128.0;

// Normalized RGB patch with full provenance.
struct PatchRecord {
  std::vector<std::uint8_t> pixels;  // 48*48*3, row-major RGB
  point3d_id_t track_id = -1;
  int image_id = -1;
  Eigen::Vector2d center_xy = Eigen::Vector2d::Zero();
  double scale = 0.0;
  double rotation_rad = 0.0;
  double crop_side_px = 0.0;  // source-image crop side before resampling
};

// Whether the stored feature orientation is undone (output is
// rotation-normalized, the default) or applied on top.
enum class RotationConvention { kUndoOrientation, kApplyOrientation };

double clamp_crop_side(double feature_scale);

// Bilinear sampling of a square window of side `side_px` centered at
// `center`, rotated by `rot_rad`, resampled to out_size x out_size.
// Out-of-bounds source pixels replicate the nearest edge. The output is
// always 3 channels; grayscale sources are replicated.
std::vector<float> sample_rotated_window(const RawImage& image, const Eigen::Vector2d& center,
                                         double side_px, double rot_rad, int out_size);

// Scale/rotation-normalized 48x48 patch around the feature point. The
// crop side is 12*s clamped to [20, 128].
// Requires obs.xy inside the image.
PatchRecord extract_patch(const RawImage& image, const Observation& obs,
                          point3d_id_t track_id = -1,
                          RotationConvention convention = RotationConvention::kUndoOrientation);

// Central 32x32 window (rows/cols 8..39) of a 48x48 patch.
std::vector<std::uint8_t> center_crop_32(const PatchRecord& patch);

struct AugmentParams {
  double rotation_deg = 0.0;  // in [-22.5, 22.5]
  double scale = 1.0;         // in [1.0, 1.1]
};

AugmentParams sample_augment_params(Rng& rng);

// Random rotation/scale about the patch center followed by the central
// 32x32 crop. Deterministic for a fixed seed.
std::vector<std::uint8_t> augment(const PatchRecord& patch, std::uint64_t rng_seed);
std::vector<std::uint8_t> augment_with_params(const PatchRecord& patch,
                                              const AugmentParams& params);

// ITU-R BT.601 luma, for grayscale export.
std::vector<std::uint8_t> to_grayscale_601(const std::vector<std::uint8_t>& rgb);

// PSDS container: magic "PSDS", version u16, record count u64, then
// fixed-size little-endian records.
void write_patch_file(const std::string& path, const std::vector<PatchRecord>& records);
std::vector<PatchRecord> read_patch_file(const std::string& path);

}  // namespace psforge
