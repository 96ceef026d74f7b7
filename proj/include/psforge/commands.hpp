#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "psforge/colmap_io.hpp"
#include "psforge/sampler.hpp"
#include "psforge/synth.hpp"

namespace psforge {

// Exit codes used by the psforge tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitParseError = 2;
inline constexpr int kExitIntegrityError = 3;
inline constexpr int kExitAlignmentError = 4;
inline constexpr int kExitFormatError = 5;
inline constexpr int kExitInsufficientData = 6;

struct RunConfig {
  std::string scene_dir;
  std::string images_dir;
  std::string out_dir;
  SamplingThresholds thresholds;
  ScaleClamp clamp;
  double margin = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
  KeypointFormat keypoint_format = KeypointFormat::kAuto;
};

// Stable hash of every field that influences outputs; embedded in the
// manifest so reruns can be matched to their configuration.
std::string config_hash(const RunConfig& config);

struct BuildResult {
  std::int64_t patches = 0;
  std::int64_t pairs = 0;
  std::string manifest_path;
  std::string patches_path;
  std::string pairs_path;
};

// Ingest -> sample -> extract -> write dataset (patches.psds, pairs.tsv,
// manifest.json). Deterministic for a fixed config, independent of the
// thread count.
BuildResult cmd_build(const RunConfig& config);

struct StatsSummary {
  std::int64_t patches = 0;
  std::int64_t pairs = 0;
  std::int64_t tracks = 0;
  std::array<std::int64_t, 18> angle_hist{};       // 10-degree buckets
  std::array<std::int64_t, 12> scale_ratio_hist{}; // log2 buckets over [1, 16)

  std::string to_json() const;
  std::string to_text() const;
};

StatsSummary cmd_stats(const std::string& patches_path, const std::string& pairs_path);

struct GenSynthResult {
  std::string scene_dir;
  int images_written = 0;
};

GenSynthResult cmd_gen_synth(const SynthConfig& cfg, const std::string& out_dir,
                             bool with_images);

// Full command-line tool; returns a process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace psforge
