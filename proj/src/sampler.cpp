#include "psforge/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "psforge/errors.hpp"

namespace psforge {

void validate_thresholds(const SamplingThresholds& th) {
  if (!(th.sc_th > 1.0)) {
    throw ContractViolation("thresholds: sc_th must be > 1");
  }
  if (!(th.min_v_th >= 0.0) || !(th.min_v_th <= th.max_v_th) || !(th.max_v_th <= 180.0)) {
    throw ContractViolation("thresholds: need 0 <= min_v_th <= max_v_th <= 180");
  }
  if (!(th.scale_jump > 1.0)) {
    throw ContractViolation("thresholds: scale_jump must be > 1");
  }
}

MatchSet build_match_set(int reference, const TrackGeometry& geom, const AngleMatrix& angles,
                         const SamplingThresholds& th) {
  validate_thresholds(th);
  const int n = geom.size();
  if (reference < 0 || reference >= n) {
    throw ContractViolation("build_match_set: reference index out of range");
  }
  if (angles.size() != n || static_cast<int>(geom.depth.size()) != n ||
      static_cast<int>(geom.view_dir.size()) != n) {
    throw ContractViolation("build_match_set: geometry/angle size mismatch");
  }
  for (int k = 0; k < n; ++k) {
    if (!(geom.depth[k] > 0.0)) {
      throw ContractViolation("build_match_set: non-positive depth at index " +
                              std::to_string(k));
    }
  }

  MatchSet set;
  set.reference = reference;
  set.members.push_back(reference);
  std::vector<char> in_set(n, 0);
  in_set[reference] = 1;

  const auto fd = [&geom](int k) { return geom.focal[k] / geom.depth[k]; };
  const auto ratio = [&fd](int p, int q) {
    const double rp = fd(p);
    const double rq = fd(q);
    return std::max(rp, rq) / std::min(rp, rq);
  };

  while (true) {
    // Candidate with the largest minimum angle to the current members.
    int best = -1;
    double best_mvd = -1.0;
    for (int k = 0; k < n; ++k) {
      if (k <= reference || in_set[k]) continue;
      if (angles(reference, k) > th.max_v_th) continue;
      double mvd = 180.0;
      for (int h : set.members) mvd = std::min(mvd, angles(h, k));
      if (mvd > best_mvd) {
        best_mvd = mvd;
        best = k;
      }
    }
    if (best < 0) break;

    // Angularly nearest member, ties to the lowest patch index.
    int nearest = set.members.front();
    double nearest_angle = angles(nearest, best);
    for (int h : set.members) {
      const double a = angles(h, best);
      if (a < nearest_angle || (a == nearest_angle && h < nearest)) {
        nearest_angle = a;
        nearest = h;
      }
    }

    const double s_ij = ratio(reference, best);
    const double s_rj = ratio(nearest, best);
    const bool accept = (best_mvd >= th.min_v_th || s_rj > th.scale_jump) && s_ij < th.sc_th;
    if (!accept) break;
    set.members.push_back(best);
    in_set[best] = 1;
  }
  return set;
}

std::vector<PairRecord> sample_track_pairs(const TrackGeometry& geom,
                                           const SamplingThresholds& th) {
  const int n = geom.size();
  std::vector<PairRecord> pairs;
  if (n == 0) return pairs;
  const AngleMatrix angles = angle_matrix(geom.view_dir);
  for (int i = 0; i < n; ++i) {
    const MatchSet set = build_match_set(i, geom, angles, th);
    for (size_t k = 1; k < set.members.size(); ++k) {
      const int j = set.members[k];
      PairRecord rec;
      rec.a = i;
      rec.b = j;
      rec.angle_deg = angles(i, j);
      rec.scale_ratio = scale_ratio(geom.focal[i], geom.depth[i], geom.focal[j], geom.depth[j]);
      pairs.push_back(rec);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairRecord& x, const PairRecord& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return pairs;
}

TrackGeometry build_track_geometry(const SceneModel& scene, const Track& track,
                                   const ScaleClamp& clamp, std::vector<int>* kept_indices,
                                   SampleStats* stats) {
  TrackGeometry geom;
  kept_indices->clear();
  for (size_t idx = 0; idx < track.observations.size(); ++idx) {
    const Observation& obs = track.observations[idx];
    const ImageView& view = scene.views.at(obs.image_id);
    const double d = depth(track.position, view);
    if (!(d > 0.0)) {
      if (stats) ++stats->dropped_behind_camera;
      continue;
    }
    if (obs.scale < clamp.min_scale || obs.scale > clamp.max_scale) {
      if (stats) ++stats->dropped_scale;
      continue;
    }
    geom.focal.push_back(scene.cameras.at(view.camera_id).focal_px);
    geom.depth.push_back(d);
    geom.view_dir.push_back(view.viewing_direction);
    kept_indices->push_back(static_cast<int>(idx));
  }
  return geom;
}

SceneSampleResult sample_scene(const SceneModel& scene, const SamplingThresholds& th,
                               const ScaleClamp& clamp, int threads) {
  validate_thresholds(th);
  if (threads < 1) threads = 1;

  std::vector<const Track*> track_ptrs;
  track_ptrs.reserve(scene.tracks.size());
  for (const auto& [id, track] : scene.tracks) track_ptrs.push_back(&track);

  struct PerTrack {
    TrackSample sample;
    std::vector<PairRecord> pairs;
    SampleStats stats;
  };
  std::vector<PerTrack> slots(track_ptrs.size());

  const auto process = [&](size_t slot) {
    const Track& track = *track_ptrs[slot];
    PerTrack& out = slots[slot];
    out.stats.observations_total = static_cast<std::int64_t>(track.observations.size());
    TrackGeometry geom =
        build_track_geometry(scene, track, clamp, &out.sample.kept_indices, &out.stats);
    out.stats.observations_kept = geom.size();
    if (geom.size() == 0) return;

    const AngleMatrix angles = angle_matrix(geom.view_dir);
    const std::vector<int>& kept = out.sample.kept_indices;
    for (int i = 0; i < geom.size(); ++i) {
      MatchSet set = build_match_set(i, geom, angles, th);
      for (size_t k = 1; k < set.members.size(); ++k) {
        const int j = set.members[k];
        PairRecord rec;
        rec.track_id = track.point_id;
        rec.a = kept[i];
        rec.b = kept[j];
        rec.angle_deg = angles(i, j);
        rec.scale_ratio =
            scale_ratio(geom.focal[i], geom.depth[i], geom.focal[j], geom.depth[j]);
        out.pairs.push_back(rec);
      }
      set.reference = kept[set.reference];
      for (int& m : set.members) m = kept[m];
      out.sample.match_sets.push_back(std::move(set));
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const PairRecord& x, const PairRecord& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
  };

  if (threads == 1 || track_ptrs.size() < 2) {
    for (size_t s = 0; s < slots.size(); ++s) process(s);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(track_ptrs.size()));
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (size_t s = cursor.fetch_add(1); s < slots.size(); s = cursor.fetch_add(1)) {
          process(s);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  SceneSampleResult result;
  result.stats.tracks_total = static_cast<std::int64_t>(track_ptrs.size());
  for (size_t s = 0; s < slots.size(); ++s) {
    PerTrack& slot = slots[s];
    result.stats.observations_total += slot.stats.observations_total;
    result.stats.observations_kept += slot.stats.observations_kept;
    result.stats.dropped_behind_camera += slot.stats.dropped_behind_camera;
    result.stats.dropped_scale += slot.stats.dropped_scale;
    result.pairs.pairs.insert(result.pairs.pairs.end(), slot.pairs.begin(), slot.pairs.end());
    result.tracks.emplace(track_ptrs[s]->point_id, std::move(slot.sample));
  }
  // Slots were walked in ascending track id and pairs are sorted within
  // each track, so the merged list is already canonical.
  return result;
}

std::string serialize_pair_list(const PairList& list) {
  std::string out;
  char buf[128];
  for (const PairRecord& rec : list.pairs) {
    std::snprintf(buf, sizeof(buf), "%lld\t%d\t%d\t%.17g\t%.17g\n",
                  static_cast<long long>(rec.track_id), rec.a, rec.b, rec.angle_deg,
                  rec.scale_ratio);
    out += buf;
  }
  return out;
}

PairList parse_pair_list(const std::string& text) {
  PairList list;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    PairRecord rec;
    long long track_id = 0;
    if (std::sscanf(line.c_str(), "%lld\t%d\t%d\t%lg\t%lg", &track_id, &rec.a, &rec.b,
                    &rec.angle_deg, &rec.scale_ratio) != 5) {
      throw ParseError("pairs", line_no, "expected 5 tab-separated fields");
    }
    rec.track_id = track_id;
    list.pairs.push_back(rec);
  }
  return list;
}

}  // namespace psforge
