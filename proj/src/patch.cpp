#include "psforge/patch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "psforge/binary_io.hpp"
#include "psforge/errors.hpp"

namespace psforge {

namespace {

constexpr size_t kPatchBytes = static_cast<size_t>(kPatchSize) * kPatchSize * 3;

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 255.0f)));
}

float bilinear(const RawImage& img, double x, double y, int c) {
  // Edge replication: clamp to the sample grid.
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = img.at(x0, y0, c);
  const double v10 = img.at(x1, y0, c);
  const double v01 = img.at(x0, y1, c);
  const double v11 = img.at(x1, y1, c);
  const double top = v00 + fx * (v10 - v00);
  const double bot = v01 + fx * (v11 - v01);
  return static_cast<float>(top + fy * (bot - top));
}

}  // namespace

double clamp_crop_side(double feature_scale) {
  return std::clamp(kCropScale * feature_scale, kCropSideMin, kCropSideMax);
}

std::vector<float> sample_rotated_window(const RawImage& image, const Eigen::Vector2d& center,
                                         double side_px, double rot_rad, int out_size) {
  if (image.channels != 1 && image.channels != 3) {
    throw ContractViolation("sample_rotated_window: channels must be 1 or 3");
  }
  std::vector<float> out(static_cast<size_t>(out_size) * out_size * 3);
  const double step = side_px / out_size;
  const double half = (out_size - 1) / 2.0;
  const double cos_r = std::cos(rot_rad);
  const double sin_r = std::sin(rot_rad);
  size_t idx = 0;
  for (int v = 0; v < out_size; ++v) {
    const double oy = (v - half) * step;
    for (int u = 0; u < out_size; ++u) {
      const double ox = (u - half) * step;
      const double sx = center.x() + cos_r * ox - sin_r * oy;
      const double sy = center.y() + sin_r * ox + cos_r * oy;
      for (int c = 0; c < 3; ++c) {
        const int src_c = image.channels == 3 ? c : 0;
        out[idx++] = bilinear(image, sx, sy, src_c);
      }
    }
  }
  return out;
}

PatchRecord extract_patch(const RawImage& image, const Observation& obs, point3d_id_t track_id,
                          RotationConvention convention) {
  if (obs.xy.x() < 0.0 || obs.xy.x() > image.width || obs.xy.y() < 0.0 ||
      obs.xy.y() > image.height) {
    throw ContractViolation("extract_patch: feature point outside image");
  }
  PatchRecord rec;
  rec.track_id = track_id;
  rec.image_id = obs.image_id;
  rec.center_xy = obs.xy;
  rec.scale = obs.scale;
  rec.rotation_rad = obs.orientation_rad;
  rec.crop_side_px = clamp_crop_side(obs.scale);

  const double rot = convention == RotationConvention::kUndoOrientation
                         ? obs.orientation_rad
                         : -obs.orientation_rad;
  const std::vector<float> samples =
      sample_rotated_window(image, obs.xy, rec.crop_side_px, rot, kPatchSize);
  rec.pixels.resize(kPatchBytes);
  for (size_t k = 0; k < kPatchBytes; ++k) rec.pixels[k] = quantize(samples[k]);
  return rec;
}

std::vector<std::uint8_t> center_crop_32(const PatchRecord& patch) {
  if (patch.pixels.size() != kPatchBytes) {
    throw ContractViolation("center_crop_32: patch must be 48x48x3");
  }
  const int offset = (kPatchSize - kCropSize) / 2;
  std::vector<std::uint8_t> out(static_cast<size_t>(kCropSize) * kCropSize * 3);
  for (int y = 0; y < kCropSize; ++y) {
    const std::uint8_t* src =
        patch.pixels.data() + ((static_cast<size_t>(y) + offset) * kPatchSize + offset) * 3;
    std::copy_n(src, static_cast<size_t>(kCropSize) * 3, out.data() + static_cast<size_t>(y) * kCropSize * 3);
  }
  return out;
}

AugmentParams sample_augment_params(Rng& rng) {
  AugmentParams params;
  params.rotation_deg = uniform_range(rng, -22.5, 22.5);
  params.scale = uniform_range(rng, 1.0, 1.1);
  return params;
}

std::vector<std::uint8_t> augment_with_params(const PatchRecord& patch,
                                              const AugmentParams& params) {
  if (patch.pixels.size() != kPatchBytes) {
    throw ContractViolation("augment: patch must be 48x48x3");
  }
  RawImage src;
  src.width = kPatchSize;
  src.height = kPatchSize;
  src.channels = 3;
  src.data = patch.pixels;

  const double rot = -params.rotation_deg * M_PI / 180.0;
  const double side = kPatchSize / params.scale;
  const Eigen::Vector2d center((kPatchSize - 1) / 2.0, (kPatchSize - 1) / 2.0);
  const std::vector<float> samples = sample_rotated_window(src, center, side, rot, kPatchSize);

  PatchRecord warped;
  warped.pixels.resize(kPatchBytes);
  for (size_t k = 0; k < kPatchBytes; ++k) warped.pixels[k] = quantize(samples[k]);
  return center_crop_32(warped);
}

std::vector<std::uint8_t> augment(const PatchRecord& patch, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return augment_with_params(patch, sample_augment_params(rng));
}

std::vector<std::uint8_t> to_grayscale_601(const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() % 3 != 0) {
    throw ContractViolation("to_grayscale_601: input is not RGB");
  }
  std::vector<std::uint8_t> out(rgb.size() / 3);
  for (size_t k = 0; k < out.size(); ++k) {
    const double y =
        0.299 * rgb[3 * k] + 0.587 * rgb[3 * k + 1] + 0.114 * rgb[3 * k + 2];
    out[k] = static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
  }
  return out;
}

namespace {
constexpr char kPatchMagic[4] = {'P', 'S', 'D', 'S'};
constexpr std::uint16_t kPatchVersion = 1;
}  // namespace

void write_patch_file(const std::string& path, const std::vector<PatchRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out.write(kPatchMagic, 4);
  write_u16le(out, kPatchVersion);
  write_u64le(out, records.size());
  for (const PatchRecord& rec : records) {
    if (rec.pixels.size() != kPatchBytes) {
      throw ContractViolation("write_patch_file: patch must be 48x48x3");
    }
    write_u64le(out, static_cast<std::uint64_t>(rec.track_id));
    write_u32le(out, static_cast<std::uint32_t>(rec.image_id));
    write_f32le(out, static_cast<float>(rec.center_xy.x()));
    write_f32le(out, static_cast<float>(rec.center_xy.y()));
    write_f32le(out, static_cast<float>(rec.scale));
    write_f32le(out, static_cast<float>(rec.rotation_rad));
    write_f32le(out, static_cast<float>(rec.crop_side_px));
    out.write(reinterpret_cast<const char*>(rec.pixels.data()),
              static_cast<std::streamsize>(rec.pixels.size()));
  }
  if (!out) {
    throw Error("write failed for " + path);
  }
}

std::vector<PatchRecord> read_patch_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(path + ": cannot open patch file");
  }
  char magic[4];
  read_bytes(in, magic, 4, path + " magic");
  if (!std::equal(magic, magic + 4, kPatchMagic)) {
    throw FormatError(path + ": bad magic, not a PSDS patch file");
  }
  const std::uint16_t version = read_u16le(in, path + " version");
  if (version != kPatchVersion) {
    throw FormatError(path + ": unsupported PSDS version " + std::to_string(version));
  }
  const std::uint64_t count = read_u64le(in, path + " record count");
  std::vector<PatchRecord> records;
  records.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    PatchRecord rec;
    rec.track_id = static_cast<point3d_id_t>(read_u64le(in, path + " track_id"));
    rec.image_id = static_cast<int>(read_u32le(in, path + " image_id"));
    rec.center_xy.x() = read_f32le(in, path + " center_x");
    rec.center_xy.y() = read_f32le(in, path + " center_y");
    rec.scale = read_f32le(in, path + " scale");
    rec.rotation_rad = read_f32le(in, path + " rotation");
    rec.crop_side_px = read_f32le(in, path + " crop_side");
    rec.pixels.resize(kPatchBytes);
    read_bytes(in, rec.pixels.data(), kPatchBytes, path + " pixels");
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace psforge
