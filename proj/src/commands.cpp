#include "psforge/commands.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "psforge/errors.hpp"
#include "psforge/evaluation.hpp"
#include "psforge/geometry.hpp"
#include "psforge/mining.hpp"
#include "psforge/patch.hpp"

namespace psforge {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw Error("cannot open " + path);
  }
  std::ostringstream out;
  out << stream.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw Error("cannot write " + path);
  }
  stream << content;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

const char* keypoint_format_name(KeypointFormat format) {
  switch (format) {
    case KeypointFormat::kAuto:
      return "auto";
    case KeypointFormat::kStandard:
      return "standard";
    case KeypointFormat::kExtended:
      return "extended";
  }
  return "auto";
}

}  // namespace

std::string config_hash(const RunConfig& config) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "scene=%s;images=%s;sc_th=%.17g;min_v_th=%.17g;max_v_th=%.17g;"
                "scale_jump=%.17g;min_scale=%.17g;max_scale=%.17g;margin=%.17g;"
                "seed=%llu;kpformat=%s",
                config.scene_dir.c_str(), config.images_dir.c_str(), config.thresholds.sc_th,
                config.thresholds.min_v_th, config.thresholds.max_v_th,
                config.thresholds.scale_jump, config.clamp.min_scale, config.clamp.max_scale,
                config.margin, static_cast<unsigned long long>(config.seed),
                keypoint_format_name(config.keypoint_format));
  char out[32];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(fnv1a(buf)));
  return out;
}

BuildResult cmd_build(const RunConfig& config) {
  validate_thresholds(config.thresholds);
  ParseOptions parse_options;
  parse_options.keypoint_format = config.keypoint_format;
  const SceneModel scene = load_scene_dir(config.scene_dir, parse_options);

  const SceneSampleResult sampled =
      sample_scene(scene, config.thresholds, config.clamp, config.threads);

  // Load every image that still has observations after filtering.
  std::map<int, RawImage> images;
  for (const auto& [track_id, sample] : sampled.tracks) {
    const Track& track = scene.tracks.at(track_id);
    for (int idx : sample.kept_indices) {
      const int image_id = track.observations[idx].image_id;
      if (images.count(image_id)) continue;
      const ImageView& view = scene.views.at(image_id);
      const fs::path path = fs::path(config.images_dir) / view.name;
      if (!fs::exists(path)) {
        throw Error("missing image file: " + path.string());
      }
      images.emplace(image_id, read_pnm(path.string()));
    }
  }

  // One patch per surviving observation, ordered by (track, observation).
  struct Job {
    point3d_id_t track_id;
    const Observation* obs;
  };
  std::vector<Job> jobs;
  for (const auto& [track_id, sample] : sampled.tracks) {
    const Track& track = scene.tracks.at(track_id);
    for (int idx : sample.kept_indices) {
      jobs.push_back({track_id, &track.observations[idx]});
    }
  }
  std::vector<PatchRecord> records(jobs.size());
  const auto extract_job = [&](size_t k) {
    records[k] = extract_patch(images.at(jobs[k].obs->image_id), *jobs[k].obs, jobs[k].track_id);
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1 || jobs.size() < 2) {
    for (size_t k = 0; k < jobs.size(); ++k) extract_job(k);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(threads, static_cast<int>(jobs.size())); ++w) {
      pool.emplace_back([&] {
        for (size_t k = cursor.fetch_add(1); k < jobs.size(); k = cursor.fetch_add(1)) {
          extract_job(k);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  fs::create_directories(config.out_dir);
  BuildResult result;
  result.patches = static_cast<std::int64_t>(records.size());
  result.pairs = static_cast<std::int64_t>(sampled.pairs.pairs.size());
  result.patches_path = (fs::path(config.out_dir) / "patches.psds").string();
  result.pairs_path = (fs::path(config.out_dir) / "pairs.tsv").string();
  result.manifest_path = (fs::path(config.out_dir) / "manifest.json").string();

  write_patch_file(result.patches_path, records);
  write_text_file(result.pairs_path, serialize_pair_list(sampled.pairs));

  nlohmann::json manifest;
  manifest["scene"] = fs::path(config.scene_dir).filename().string();
  manifest["config_hash"] = config_hash(config);
  manifest["seed"] = config.seed;
  manifest["margin"] = config.margin;
  manifest["keypoint_format"] = keypoint_format_name(config.keypoint_format);
  manifest["thresholds"] = {{"sc_th", config.thresholds.sc_th},
                            {"min_v_th", config.thresholds.min_v_th},
                            {"max_v_th", config.thresholds.max_v_th},
                            {"scale_jump", config.thresholds.scale_jump}};
  manifest["scale_clamp"] = {{"min", config.clamp.min_scale}, {"max", config.clamp.max_scale}};
  manifest["counts"] = {{"tracks", sampled.stats.tracks_total},
                        {"observations", sampled.stats.observations_total},
                        {"observations_kept", sampled.stats.observations_kept},
                        {"dropped_behind_camera", sampled.stats.dropped_behind_camera},
                        {"dropped_scale", sampled.stats.dropped_scale},
                        {"patches", result.patches},
                        {"pairs", result.pairs}};
  write_text_file(result.manifest_path, manifest.dump(2) + "\n");
  return result;
}

StatsSummary cmd_stats(const std::string& patches_path, const std::string& pairs_path) {
  StatsSummary summary;
  const std::vector<PatchRecord> records = read_patch_file(patches_path);
  const PairList pairs = parse_pair_list(read_text_file(pairs_path));

  summary.patches = static_cast<std::int64_t>(records.size());
  summary.pairs = static_cast<std::int64_t>(pairs.pairs.size());
  std::set<point3d_id_t> tracks;
  for (const PatchRecord& rec : records) tracks.insert(rec.track_id);
  summary.tracks = static_cast<std::int64_t>(tracks.size());

  for (const PairRecord& rec : pairs.pairs) {
    int angle_bucket = static_cast<int>(rec.angle_deg / 10.0);
    angle_bucket = std::clamp(angle_bucket, 0, 17);
    ++summary.angle_hist[angle_bucket];
    // log2-spaced ratio buckets covering [1, 16); larger ratios land in
    // the last bucket.
    const double log_ratio = std::log2(std::max(rec.scale_ratio, 1.0));
    int ratio_bucket = static_cast<int>(log_ratio / (4.0 / 12.0));
    ratio_bucket = std::clamp(ratio_bucket, 0, 11);
    ++summary.scale_ratio_hist[ratio_bucket];
  }
  return summary;
}

std::string StatsSummary::to_json() const {
  nlohmann::json j;
  j["patches"] = patches;
  j["pairs"] = pairs;
  j["tracks"] = tracks;
  j["angle_hist_deg10"] = angle_hist;
  j["scale_ratio_hist_log2"] = scale_ratio_hist;
  return j.dump(2) + "\n";
}

std::string StatsSummary::to_text() const {
  std::ostringstream out;
  out << "tracks:  " << tracks << "\n";
  out << "patches: " << patches << "\n";
  out << "pairs:   " << pairs << "\n";
  out << "angle histogram (10 deg buckets):\n";
  for (size_t b = 0; b < angle_hist.size(); ++b) {
    out << "  [" << b * 10 << "," << (b + 1) * 10 << ") " << angle_hist[b] << "\n";
  }
  out << "scale ratio histogram (log2 buckets over [1,16)):\n";
  for (size_t b = 0; b < scale_ratio_hist.size(); ++b) {
    char lo[16], hi[16];
    std::snprintf(lo, sizeof(lo), "%.2f", std::exp2(b * (4.0 / 12.0)));
    std::snprintf(hi, sizeof(hi), "%.2f", std::exp2((b + 1) * (4.0 / 12.0)));
    out << "  [" << lo << "," << hi << ") " << scale_ratio_hist[b] << "\n";
  }
  return out.str();
}

GenSynthResult cmd_gen_synth(const SynthConfig& cfg, const std::string& out_dir,
                             bool with_images) {
  const SceneModel scene = generate_scene(cfg);
  save_scene_dir(scene, out_dir);
  GenSynthResult result;
  result.scene_dir = out_dir;
  if (with_images) {
    const fs::path images_dir = fs::path(out_dir) / "images";
    fs::create_directories(images_dir);
    for (const auto& [id, view] : scene.views) {
      const CameraIntrinsics& cam = scene.cameras.at(view.camera_id);
      const RawImage img = render_synthetic_image(cam.width, cam.height, cfg.rng_seed, id);
      write_pnm(img, (images_dir / view.name).string());
      ++result.images_written;
    }
  }
  return result;
}

namespace {

std::vector<std::int64_t> read_id_file(const std::string& path) {
  std::istringstream stream(read_text_file(path));
  std::vector<std::int64_t> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      size_t pos = 0;
      ids.push_back(std::stoll(line, &pos));
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "bad id '" + line + "'");
    }
  }
  return ids;
}

std::vector<std::uint8_t> read_label_file(const std::string& path) {
  std::istringstream stream(read_text_file(path));
  std::vector<std::uint8_t> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line == "0") {
      labels.push_back(0);
    } else if (line == "1") {
      labels.push_back(1);
    } else {
      throw ParseError(path, line_no, "labels must be 0 or 1, got '" + line + "'");
    }
  }
  return labels;
}

std::vector<std::pair<int, int>> parse_image_pairs(const std::string& text) {
  std::vector<std::pair<int, int>> pairs;
  std::istringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const size_t dash = item.find('-');
    if (dash == std::string::npos) {
      throw ParseError("--pairs: expected A-B entries, got '" + item + "'");
    }
    try {
      pairs.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
    } catch (const std::exception&) {
      throw ParseError("--pairs: bad image id in '" + item + "'");
    }
  }
  if (pairs.empty()) {
    throw ParseError("--pairs: no image pairs given");
  }
  return pairs;
}

void emit_report(const EvalReport& report, const std::string& out_path) {
  std::cout << report.to_text_table();
  if (!out_path.empty()) {
    write_text_file(out_path, report.to_json());
  }
}

EvalReport scalar_report(const std::string& task, double value) {
  EvalReport report;
  report.task = task;
  report.overall_map = value;
  return report;
}

int eval_verify(const std::string& desc_a_path, const std::string& desc_b_path,
                const std::string& labels_path, const std::string& out_path) {
  const Eigen::MatrixXf desc_a = read_descriptor_file(desc_a_path);
  const Eigen::MatrixXf desc_b = read_descriptor_file(desc_b_path);
  const std::vector<std::uint8_t> labels = read_label_file(labels_path);
  if (desc_a.rows() != desc_b.rows() || desc_a.cols() != desc_b.cols()) {
    throw AlignmentError("verification: descriptor files have mismatched shapes");
  }
  if (desc_a.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw AlignmentError("verification: " + std::to_string(desc_a.rows()) +
                         " pairs vs " + std::to_string(labels.size()) + " labels");
  }
  std::vector<double> distances(labels.size());
  for (Eigen::Index i = 0; i < desc_a.rows(); ++i) {
    distances[i] = (desc_a.row(i) - desc_b.row(i)).cast<double>().norm();
  }
  emit_report(scalar_report("verification", verification_ap(distances, labels)), out_path);
  return kExitOk;
}

int eval_match(const std::string& ref_desc_path, const std::string& ref_ids_path,
               const std::string& target_desc_path, const std::string& target_ids_path,
               const std::string& gt_path, const std::string& out_path) {
  const Eigen::MatrixXd ref_desc = read_descriptor_file(ref_desc_path).cast<double>();
  const Eigen::MatrixXd target_desc = read_descriptor_file(target_desc_path).cast<double>();
  const std::vector<std::int64_t> ref_ids = read_id_file(ref_ids_path);
  const std::vector<std::int64_t> target_ids = read_id_file(target_ids_path);
  if (ref_desc.rows() != static_cast<Eigen::Index>(ref_ids.size()) ||
      target_desc.rows() != static_cast<Eigen::Index>(target_ids.size())) {
    throw AlignmentError("matching: descriptor/id row counts disagree");
  }

  std::map<std::int64_t, std::int64_t> ground_truth;
  std::istringstream stream(read_text_file(gt_path));
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    long long a = 0, b = 0;
    if (std::sscanf(line.c_str(), "%lld %lld", &a, &b) != 2) {
      throw ParseError(gt_path, line_no, "expected 'ref_id target_id'");
    }
    ground_truth[a] = b;
  }
  emit_report(
      scalar_report("matching",
                    matching_map(ref_desc, ref_ids, target_desc, target_ids, ground_truth)),
      out_path);
  return kExitOk;
}

int eval_retrieve(const std::string& query_desc_path, const std::string& pool_desc_path,
                  const std::string& pool_ids_path, const std::string& relevant_path,
                  const std::string& distractors, const std::string& out_path) {
  const Eigen::MatrixXd queries = read_descriptor_file(query_desc_path).cast<double>();
  RetrievalPool pool;
  pool.descriptors = read_descriptor_file(pool_desc_path).cast<double>();
  pool.ids = read_id_file(pool_ids_path);
  if (pool.descriptors.rows() != static_cast<Eigen::Index>(pool.ids.size())) {
    throw AlignmentError("retrieval: pool descriptor/id row counts disagree");
  }

  std::vector<std::vector<std::int64_t>> relevant(queries.rows());
  std::istringstream stream(read_text_file(relevant_path));
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    long long q = 0, id = 0;
    if (std::sscanf(line.c_str(), "%lld %lld", &q, &id) != 2) {
      throw ParseError(relevant_path, line_no, "expected 'query_row relevant_id'");
    }
    if (q < 0 || q >= queries.rows()) {
      throw AlignmentError("retrieval: query row " + std::to_string(q) + " out of range");
    }
    relevant[q].push_back(id);
  }

  std::vector<int> counts;
  if (!distractors.empty()) {
    std::istringstream dstream(distractors);
    std::string item;
    while (std::getline(dstream, item, ',')) {
      try {
        counts.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ParseError("--distractors: bad count '" + item + "'");
      }
    }
  }
  emit_report(scalar_report("retrieval", retrieval_map(queries, pool, relevant, counts)),
              out_path);
  return kExitOk;
}

int eval_strecha(const std::string& scene_dir, int ref_image, const std::string& pairs_text,
                 const std::string& desc_dir, const std::string& emit_keypoints_dir,
                 int n_points, std::uint64_t seed, const std::string& out_path) {
  const SceneModel scene = load_scene_dir(scene_dir);
  const std::vector<std::pair<int, int>> pairs = parse_image_pairs(pairs_text);

  std::set<int> image_ids;
  for (const auto& [a, b] : pairs) {
    image_ids.insert(a);
    image_ids.insert(b);
  }

  if (!emit_keypoints_dir.empty()) {
    fs::create_directories(emit_keypoints_dir);
    for (int id : image_ids) {
      const std::vector<TransferredKeypoint> kps = strecha_keypoints(scene, ref_image, id);
      std::string text;
      char buf[96];
      for (const TransferredKeypoint& kp : kps) {
        std::snprintf(buf, sizeof(buf), "%lld\t%.17g\t%.17g\n",
                      static_cast<long long>(kp.track_id), kp.xy.x(), kp.xy.y());
        text += buf;
      }
      std::snprintf(buf, sizeof(buf), "image_%d.keypoints.tsv", id);
      write_text_file((fs::path(emit_keypoints_dir) / buf).string(), text);
    }
    std::cout << "keypoints written for " << image_ids.size() << " images\n";
    return kExitOk;
  }

  std::map<int, Eigen::MatrixXf> descriptors;
  for (int id : image_ids) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "image_%d.psde", id);
    const fs::path path = fs::path(desc_dir) / buf;
    if (!fs::exists(path)) {
      throw FormatError("missing descriptor file: " + path.string());
    }
    descriptors.emplace(id, read_descriptor_file(path.string()));
  }

  emit_report(strecha_protocol(scene, ref_image, pairs, descriptors, n_points, seed), out_path);
  return kExitOk;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"psforge: patch-correspondence datasets from SFM reconstructions"};
  app.require_subcommand(1);

  RunConfig config;
  auto* build = app.add_subcommand("build", "ingest a scene and write the patch dataset");
  build->set_config("--config", "", "TOML-style config file; flags override it");
  build->add_option("--scene", config.scene_dir, "COLMAP sparse text model directory")
      ->required();
  build->add_option("--images", config.images_dir, "directory with the scene images (PGM/PPM)")
      ->required();
  build->add_option("--out", config.out_dir, "output directory")->required();
  build->add_option("--sc-th", config.thresholds.sc_th, "scale-ratio threshold");
  build->add_option("--min-v-th", config.thresholds.min_v_th, "min viewpoint difference (deg)");
  build->add_option("--max-v-th", config.thresholds.max_v_th, "max viewpoint difference (deg)");
  build->add_option("--scale-jump", config.thresholds.scale_jump, "scale fallback threshold");
  build->add_option("--min-scale", config.clamp.min_scale, "feature scale lower clamp");
  build->add_option("--max-scale", config.clamp.max_scale, "feature scale upper clamp");
  build->add_option("--margin", config.margin, "mining margin recorded in the manifest");
  build->add_option("--seed", config.seed, "run seed recorded in the manifest");
  build->add_option("--threads", config.threads, "worker threads")
      ->envname("PSFORGE_THREADS");
  std::string kp_format = "auto";
  build->add_option("--keypoint-format", kp_format, "keypoint line layout: auto|standard|extended")
      ->check(CLI::IsMember({"auto", "standard", "extended"}));

  auto* stats = app.add_subcommand("stats", "summarize a built dataset");
  std::string stats_dataset, stats_out;
  stats->add_option("--dataset", stats_dataset, "dataset directory from build")->required();
  stats->add_option("--out", stats_out, "write the JSON summary here");

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic scene");
  SynthConfig synth_cfg;
  std::string gen_out;
  bool gen_images = false;
  gen->add_option("--out", gen_out, "output scene directory")->required();
  gen->add_option("--n-points", synth_cfg.n_points, "number of 3D points");
  gen->add_option("--n-cameras", synth_cfg.n_cameras, "number of cameras");
  gen->add_option("--radius", synth_cfg.ring_radius, "camera ring radius");
  gen->add_option("--extent", synth_cfg.box_half_extent, "point box half extent");
  gen->add_option("--elevation-span", synth_cfg.elevation_span_deg,
                  "camera elevation span (deg)");
  gen->add_option("--noise-px", synth_cfg.noise_px, "observation jitter sigma");
  gen->add_option("--seed", synth_cfg.rng_seed, "generator seed");
  gen->add_flag("--with-images", gen_images, "also render PPM images");

  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  std::string task, out_path;
  eval->add_option("--task", task, "match|verify|retrieve|strecha")
      ->required()
      ->check(CLI::IsMember({"match", "verify", "retrieve", "strecha"}));
  eval->add_option("--out", out_path, "write the JSON report here");
  std::string desc_a, desc_b, labels;
  eval->add_option("--desc-a", desc_a, "verification: descriptor file, side A");
  eval->add_option("--desc-b", desc_b, "verification: descriptor file, side B");
  eval->add_option("--labels", labels, "verification: 0/1 labels, one per line");
  std::string ref_desc, ref_ids, target_desc, target_ids, gt;
  eval->add_option("--ref-desc", ref_desc, "matching: reference descriptors");
  eval->add_option("--ref-ids", ref_ids, "matching: reference keypoint ids");
  eval->add_option("--target-desc", target_desc, "matching: target descriptors");
  eval->add_option("--target-ids", target_ids, "matching: target keypoint ids");
  eval->add_option("--gt", gt, "matching: ground-truth id pairs");
  std::string query_desc, pool_desc, pool_ids, relevant, distractors;
  eval->add_option("--query-desc", query_desc, "retrieval: query descriptors");
  eval->add_option("--pool-desc", pool_desc, "retrieval: pool descriptors");
  eval->add_option("--pool-ids", pool_ids, "retrieval: pool ids");
  eval->add_option("--relevant", relevant, "retrieval: 'query_row relevant_id' lines");
  eval->add_option("--distractors", distractors, "retrieval: comma-separated counts");
  std::string scene_dir, pairs_text, desc_dir, emit_keypoints;
  int ref_image = 0;
  int n_points = 2000;
  std::uint64_t eval_seed = 0;
  eval->add_option("--scene", scene_dir, "strecha: scene directory");
  eval->add_option("--ref-image", ref_image, "strecha: keypoint source image id");
  eval->add_option("--pairs", pairs_text, "strecha: image pairs, e.g. 0-1,0-2");
  eval->add_option("--desc-dir", desc_dir, "strecha: directory with image_<id>.psde files");
  eval->add_option("--emit-keypoints", emit_keypoints,
                   "strecha: write per-image keypoint lists and exit");
  eval->add_option("--n-points", n_points, "strecha: points sampled per pair");
  eval->add_option("--seed", eval_seed, "strecha: sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (build->parsed()) {
    if (kp_format == "standard") {
      config.keypoint_format = KeypointFormat::kStandard;
    } else if (kp_format == "extended") {
      config.keypoint_format = KeypointFormat::kExtended;
    }
    const BuildResult result = cmd_build(config);
    std::cout << "patches: " << result.patches << "\npairs:   " << result.pairs
              << "\nmanifest: " << result.manifest_path << "\n";
    return kExitOk;
  }
  if (stats->parsed()) {
    const fs::path base(stats_dataset);
    const StatsSummary summary =
        cmd_stats((base / "patches.psds").string(), (base / "pairs.tsv").string());
    std::cout << summary.to_text();
    if (!stats_out.empty()) {
      write_text_file(stats_out, summary.to_json());
    }
    return kExitOk;
  }
  if (gen->parsed()) {
    const GenSynthResult result = cmd_gen_synth(synth_cfg, gen_out, gen_images);
    std::cout << "scene written to " << result.scene_dir;
    if (gen_images) std::cout << " with " << result.images_written << " images";
    std::cout << "\n";
    return kExitOk;
  }
  if (eval->parsed()) {
    const auto require = [](const std::string& value, const char* flag) -> const std::string& {
      if (value.empty()) {
        throw ParseError(std::string("eval: missing required flag ") + flag);
      }
      return value;
    };
    if (task == "verify") {
      return eval_verify(require(desc_a, "--desc-a"), require(desc_b, "--desc-b"),
                         require(labels, "--labels"), out_path);
    }
    if (task == "match") {
      return eval_match(require(ref_desc, "--ref-desc"), require(ref_ids, "--ref-ids"),
                        require(target_desc, "--target-desc"),
                        require(target_ids, "--target-ids"), require(gt, "--gt"), out_path);
    }
    if (task == "retrieve") {
      return eval_retrieve(require(query_desc, "--query-desc"),
                           require(pool_desc, "--pool-desc"), require(pool_ids, "--pool-ids"),
                           require(relevant, "--relevant"), distractors, out_path);
    }
    if (emit_keypoints.empty()) {
      require(desc_dir, "--desc-dir");
    }
    return eval_strecha(require(scene_dir, "--scene"), ref_image,
                        require(pairs_text, "--pairs"), desc_dir, emit_keypoints, n_points,
                        eval_seed, out_path);
  }
  return kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kExitIntegrityError;
  } catch (const AlignmentError& e) {
    std::cerr << "alignment error: " << e.what() << "\n";
    return kExitAlignmentError;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormatError;
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace psforge
