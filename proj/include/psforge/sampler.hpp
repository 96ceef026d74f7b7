#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "psforge/geometry.hpp"
#include "psforge/scene.hpp"

namespace psforge {

struct SamplingThresholds {
  // Maximum allowed scale ratio between the reference and a member.
  double sc_th = 2.5;
  // Minimum viewpoint difference (degrees) a picked candidate must add,
  // unless the scale fallback fires.
  double min_v_th = 25.0;
  // Candidates beyond this angle (degrees) from the reference are never
  // considered. 75 is the recommended setting for planar scenes.
  double max_v_th = 50.0;
  // Scale-ratio fallback against the angularly nearest member.
  double scale_jump = 1.5;
};

// Throws ContractViolation unless sc_th > 1, 0 <= min <= max <= 180 and
// scale_jump > 1.
void validate_thresholds(const SamplingThresholds& th);

// Per-patch focal, depth and viewing direction for one track.
struct TrackGeometry {
  std::vector<double> focal;
  std::vector<double> depth;
  std::vector<Eigen::Vector3d> view_dir;

  int size() const { return static_cast<int>(focal.size()); }
};

// Diverse matching set for one reference patch; members are in
// insertion order and start with the reference itself.
struct MatchSet {
  int reference = 0;
  std::vector<int> members;
};

struct PairRecord {
  point3d_id_t track_id = -1;
  int a = 0;  // patch indices within the track, a < b
  int b = 0;
  double angle_deg = 0.0;
  double scale_ratio = 0.0;
};

struct PairList {
  std::vector<PairRecord> pairs;
};

// Greedy max-min selection of a viewpoint/scale-diverse matching set.
// Each iteration considers candidates j > i, j not yet a member, with
// A[i][j] <= max_v_th, picks the one maximizing the minimum angle to the
// current members (ties to the lowest index), and accepts it iff
//   (MVD_j >= min_v_th  or  s_rj > scale_jump)  and  s_ij < sc_th
// where r is the member angularly nearest to j. The first rejection or
// candidate exhaustion terminates.
// Requires all depths positive and A sized to the geometry.
MatchSet build_match_set(int reference, const TrackGeometry& geom, const AngleMatrix& angles,
                         const SamplingThresholds& th);

// Runs build_match_set for every reference index and pairs each member
// with its reference. The j > i constraint makes every unordered pair
// unique. Pairs are returned sorted by (a, b); track_id is left at -1.
std::vector<PairRecord> sample_track_pairs(const TrackGeometry& geom,
                                           const SamplingThresholds& th);

// Observation filter applied before sampling.
struct ScaleClamp {
  double min_scale = 1.6;
  double max_scale = 15.0;
};

struct SampleStats {
  std::int64_t tracks_total = 0;
  std::int64_t observations_total = 0;
  std::int64_t observations_kept = 0;
  std::int64_t dropped_behind_camera = 0;
  std::int64_t dropped_scale = 0;
};

struct TrackSample {
  // Original observation indices that survived filtering, ascending.
  std::vector<int> kept_indices;
  // One match set per surviving reference, indices remapped to the
  // original observation order.
  std::vector<MatchSet> match_sets;
};

struct SceneSampleResult {
  PairList pairs;  // sorted by (track_id, a, b)
  std::map<point3d_id_t, TrackSample> tracks;
  SampleStats stats;
};

// Geometry for one track with observations filtered by depth and scale.
// kept_indices receives the surviving original indices.
TrackGeometry build_track_geometry(const SceneModel& scene, const Track& track,
                                   const ScaleClamp& clamp, std::vector<int>* kept_indices,
                                   SampleStats* stats = nullptr);

// Samples every track of the scene. Tracks are independent and are
// processed on `threads` workers; the merged result is identical to
// serial execution.
SceneSampleResult sample_scene(const SceneModel& scene, const SamplingThresholds& th,
                               const ScaleClamp& clamp = {}, int threads = 1);

// Tab-separated serialization: track_id, a, b, angle_deg, scale_ratio.
std::string serialize_pair_list(const PairList& list);
PairList parse_pair_list(const std::string& text);

}  // namespace psforge
