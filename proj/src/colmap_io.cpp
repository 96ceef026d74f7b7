#include "psforge/colmap_io.hpp"

#include <Eigen/Geometry>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "psforge/errors.hpp"

namespace psforge {

namespace {

constexpr point3d_id_t kNoPoint3D = -1;

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

class LineTokens {
 public:
  LineTokens(const char* file, int line, std::vector<std::string> tokens)
      : file_(file), line_(line), tokens_(std::move(tokens)) {}

  size_t size() const { return tokens_.size(); }
  size_t remaining() const { return tokens_.size() - next_; }
  const char* file() const { return file_; }
  int line() const { return line_; }

  ParseError error(const std::string& what) const { return ParseError(file_, line_, what); }

  const std::string& next_token(const char* what) {
    if (next_ >= tokens_.size()) {
      throw error(std::string("missing field: ") + what);
    }
    return tokens_[next_++];
  }

  double next_double(const char* what) {
    const std::string& tok = next_token(what);
    try {
      size_t pos = 0;
      const double value = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return value;
    } catch (const std::exception&) {
      throw error(std::string("bad number for ") + what + ": '" + tok + "'");
    }
  }

  std::int64_t next_int(const char* what) {
    const std::string& tok = next_token(what);
    try {
      size_t pos = 0;
      const std::int64_t value = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return value;
    } catch (const std::exception&) {
      throw error(std::string("bad integer for ") + what + ": '" + tok + "'");
    }
  }

 private:
  const char* file_;
  int line_;
  std::vector<std::string> tokens_;
  size_t next_ = 0;
};

// Iterates non-empty, non-comment lines, keeping 1-based line numbers.
class LineReader {
 public:
  LineReader(const char* file, const std::string& text) : file_(file), stream_(text) {}

  bool next(LineTokens* out) {
    std::string line;
    while (std::getline(stream_, line)) {
      ++line_no_;
      std::vector<std::string> tokens = tokenize(line);
      if (tokens.empty() || tokens[0][0] == '#') continue;
      *out = LineTokens(file_, line_no_, std::move(tokens));
      return true;
    }
    return false;
  }

  const char* file() const { return file_; }
  int line() const { return line_no_; }

 private:
  const char* file_;
  std::istringstream stream_;
  int line_no_ = 0;
};

struct Keypoint {
  Eigen::Vector2d xy;
  double scale;
  double orientation_rad;
  point3d_id_t point3d_id;
};

struct RawImageEntry {
  ImageView view;
  std::vector<Keypoint> keypoints;
  int line_no = 0;
};

std::map<int, CameraIntrinsics> parse_cameras(const std::string& text) {
  std::map<int, CameraIntrinsics> cameras;
  LineReader reader("cameras.txt", text);
  LineTokens tokens("cameras.txt", 0, {});
  while (reader.next(&tokens)) {
    CameraIntrinsics cam;
    cam.camera_id = static_cast<int>(tokens.next_int("CAMERA_ID"));
    const std::string model = tokens.next_token("MODEL");
    cam.width = static_cast<int>(tokens.next_int("WIDTH"));
    cam.height = static_cast<int>(tokens.next_int("HEIGHT"));
    if (model == "SIMPLE_PINHOLE") {
      cam.focal_px = tokens.next_double("f");
      cam.principal_point.x() = tokens.next_double("cx");
      cam.principal_point.y() = tokens.next_double("cy");
    } else if (model == "PINHOLE") {
      const double fx = tokens.next_double("fx");
      const double fy = tokens.next_double("fy");
      cam.principal_point.x() = tokens.next_double("cx");
      cam.principal_point.y() = tokens.next_double("cy");
      if (std::abs(fx - fy) > 1e-9 * std::max(std::abs(fx), std::abs(fy))) {
        throw IntegrityError("camera " + std::to_string(cam.camera_id) +
                             ": PINHOLE with anisotropic focal is not supported");
      }
      cam.focal_px = fx;
    } else {
      throw tokens.error("unsupported camera model '" + model +
                         "' (only SIMPLE_PINHOLE and PINHOLE are accepted)");
    }
    if (tokens.remaining() != 0) {
      throw tokens.error("trailing fields after camera parameters");
    }
    if (!cameras.emplace(cam.camera_id, cam).second) {
      throw IntegrityError("duplicate camera id " + std::to_string(cam.camera_id));
    }
  }
  return cameras;
}

std::vector<Keypoint> parse_keypoint_line(LineTokens& tokens, const ParseOptions& options) {
  std::vector<Keypoint> keypoints;
  const size_t n = tokens.remaining();
  if (n == 0) return keypoints;

  KeypointFormat format = options.keypoint_format;
  if (format == KeypointFormat::kAuto) {
    if (n % 5 == 0) {
      format = KeypointFormat::kExtended;
    } else if (n % 3 == 0) {
      format = KeypointFormat::kStandard;
    } else {
      throw tokens.error("keypoint line has " + std::to_string(n) +
                         " fields; expected a multiple of 5 (extended) or 3 (standard)");
    }
  }
  const size_t stride = format == KeypointFormat::kExtended ? 5 : 3;
  if (n % stride != 0) {
    throw tokens.error("keypoint line has " + std::to_string(n) +
                       " fields; expected a multiple of " + std::to_string(stride));
  }
  keypoints.reserve(n / stride);
  for (size_t k = 0; k < n / stride; ++k) {
    Keypoint kp;
    kp.xy.x() = tokens.next_double("X");
    kp.xy.y() = tokens.next_double("Y");
    if (format == KeypointFormat::kExtended) {
      kp.scale = tokens.next_double("SCALE");
      kp.orientation_rad = tokens.next_double("ORIENTATION");
    } else {
      kp.scale = options.default_scale;
      kp.orientation_rad = options.default_orientation_rad;
    }
    kp.point3d_id = tokens.next_int("POINT3D_ID");
    keypoints.push_back(kp);
  }
  return keypoints;
}

std::map<int, RawImageEntry> parse_images(const std::string& text, const ParseOptions& options) {
  std::map<int, RawImageEntry> images;
  LineReader reader("images.txt", text);
  LineTokens tokens("images.txt", 0, {});
  while (reader.next(&tokens)) {
    RawImageEntry entry;
    entry.line_no = tokens.line();
    ImageView& view = entry.view;
    view.image_id = static_cast<int>(tokens.next_int("IMAGE_ID"));
    Eigen::Vector4d q;
    q(0) = tokens.next_double("QW");
    q(1) = tokens.next_double("QX");
    q(2) = tokens.next_double("QY");
    q(3) = tokens.next_double("QZ");
    Eigen::Vector3d t;
    t(0) = tokens.next_double("TX");
    t(1) = tokens.next_double("TY");
    t(2) = tokens.next_double("TZ");
    view.camera_id = static_cast<int>(tokens.next_int("CAMERA_ID"));
    view.name = tokens.next_token("NAME");
    if (tokens.remaining() != 0) {
      throw tokens.error("trailing fields after image name");
    }

    const double q_norm = q.norm();
    if (q_norm < 1e-12) {
      throw IntegrityError("image " + std::to_string(view.image_id) +
                           ": quaternion has zero norm");
    }
    q /= q_norm;
    const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
    view.orientation = quat.toRotationMatrix();
    view.center = -view.orientation.transpose() * t;
    view.viewing_direction = viewing_direction_from_orientation(view.orientation);

    LineTokens kp_tokens("images.txt", 0, {});
    if (!reader.next(&kp_tokens)) {
      throw ParseError("images.txt", reader.line(),
                       "missing keypoint line for image " + std::to_string(view.image_id));
    }
    entry.keypoints = parse_keypoint_line(kp_tokens, options);

    if (!images.emplace(view.image_id, std::move(entry)).second) {
      throw IntegrityError("duplicate image id " + std::to_string(view.image_id));
    }
  }
  return images;
}

std::map<point3d_id_t, Track> parse_points(const std::string& text,
                                           const std::map<int, RawImageEntry>& images) {
  std::map<point3d_id_t, Track> tracks;
  LineReader reader("points3D.txt", text);
  LineTokens tokens("points3D.txt", 0, {});
  while (reader.next(&tokens)) {
    Track track;
    track.point_id = tokens.next_int("POINT3D_ID");
    track.position.x() = tokens.next_double("X");
    track.position.y() = tokens.next_double("Y");
    track.position.z() = tokens.next_double("Z");
    tokens.next_int("R");
    tokens.next_int("G");
    tokens.next_int("B");
    tokens.next_double("ERROR");
    if (tokens.remaining() % 2 != 0) {
      throw tokens.error("track elements must come in (IMAGE_ID, POINT2D_IDX) pairs");
    }
    while (tokens.remaining() > 0) {
      const int image_id = static_cast<int>(tokens.next_int("IMAGE_ID"));
      const std::int64_t point2d_idx = tokens.next_int("POINT2D_IDX");
      auto image_it = images.find(image_id);
      if (image_it == images.end()) {
        throw IntegrityError("point " + std::to_string(track.point_id) +
                             ": dangling image id " + std::to_string(image_id));
      }
      const std::vector<Keypoint>& keypoints = image_it->second.keypoints;
      if (point2d_idx < 0 || static_cast<size_t>(point2d_idx) >= keypoints.size()) {
        throw IntegrityError("point " + std::to_string(track.point_id) + ": keypoint index " +
                             std::to_string(point2d_idx) + " out of range for image " +
                             std::to_string(image_id));
      }
      const Keypoint& kp = keypoints[point2d_idx];
      if (kp.point3d_id != kNoPoint3D && kp.point3d_id != track.point_id) {
        throw IntegrityError("point " + std::to_string(track.point_id) + ": keypoint " +
                             std::to_string(point2d_idx) + " in image " +
                             std::to_string(image_id) + " references point " +
                             std::to_string(kp.point3d_id));
      }
      Observation obs;
      obs.image_id = image_id;
      obs.xy = kp.xy;
      obs.scale = kp.scale;
      obs.orientation_rad = kp.orientation_rad;
      track.observations.push_back(obs);
    }
    if (!tracks.emplace(track.point_id, std::move(track)).second) {
      throw IntegrityError("duplicate point id " + std::to_string(track.point_id));
    }
  }
  return tracks;
}

void append_double(std::string* out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  *out += buf;
}

}  // namespace

SceneModel parse_scene(const std::string& cameras_text, const std::string& images_text,
                       const std::string& points_text, const ParseOptions& options) {
  SceneModel scene;
  scene.cameras = parse_cameras(cameras_text);
  std::map<int, RawImageEntry> images = parse_images(images_text, options);
  scene.tracks = parse_points(points_text, images);
  for (auto& [id, entry] : images) {
    scene.views.emplace(id, std::move(entry.view));
  }
  validate_scene(scene);
  return scene;
}

SceneText write_scene(const SceneModel& scene) {
  validate_scene(scene);
  SceneText text;

  text.cameras = "# Camera list: CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]\n";
  for (const auto& [id, cam] : scene.cameras) {
    std::string& out = text.cameras;
    out += std::to_string(id);
    out += " SIMPLE_PINHOLE ";
    out += std::to_string(cam.width);
    out += ' ';
    out += std::to_string(cam.height);
    out += ' ';
    append_double(&out, cam.focal_px);
    out += ' ';
    append_double(&out, cam.principal_point.x());
    out += ' ';
    append_double(&out, cam.principal_point.y());
    out += '\n';
  }

  // Rebuild per-image keypoint arrays from the tracks. Tracks are walked
  // in ascending point id and observations in stored order, so the
  // emitted indices are stable.
  std::map<int, std::vector<Keypoint>> image_keypoints;
  std::map<point3d_id_t, std::vector<std::pair<int, size_t>>> track_elements;
  for (const auto& [point_id, track] : scene.tracks) {
    for (const Observation& obs : track.observations) {
      std::vector<Keypoint>& list = image_keypoints[obs.image_id];
      Keypoint kp;
      kp.xy = obs.xy;
      kp.scale = obs.scale;
      kp.orientation_rad = obs.orientation_rad;
      kp.point3d_id = point_id;
      track_elements[point_id].emplace_back(obs.image_id, list.size());
      list.push_back(kp);
    }
  }

  text.images =
      "# Image list: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n"
      "#   keypoints: X Y SCALE ORIENTATION POINT3D_ID\n";
  for (const auto& [id, view] : scene.views) {
    std::string& out = text.images;
    const Eigen::Quaterniond quat(view.orientation);
    // COLMAP stores qw >= 0 by convention.
    const double sign = quat.w() < 0.0 ? -1.0 : 1.0;
    const Eigen::Vector3d t = -view.orientation * view.center;
    out += std::to_string(id);
    out += ' ';
    append_double(&out, sign * quat.w());
    out += ' ';
    append_double(&out, sign * quat.x());
    out += ' ';
    append_double(&out, sign * quat.y());
    out += ' ';
    append_double(&out, sign * quat.z());
    out += ' ';
    append_double(&out, t.x());
    out += ' ';
    append_double(&out, t.y());
    out += ' ';
    append_double(&out, t.z());
    out += ' ';
    out += std::to_string(view.camera_id);
    out += ' ';
    out += view.name;
    out += '\n';
    auto kp_it = image_keypoints.find(id);
    if (kp_it != image_keypoints.end()) {
      bool first = true;
      for (const Keypoint& kp : kp_it->second) {
        if (!first) out += ' ';
        first = false;
        append_double(&out, kp.xy.x());
        out += ' ';
        append_double(&out, kp.xy.y());
        out += ' ';
        append_double(&out, kp.scale);
        out += ' ';
        append_double(&out, kp.orientation_rad);
        out += ' ';
        out += std::to_string(kp.point3d_id);
      }
    }
    out += '\n';
  }

  text.points = "# 3D point list: POINT3D_ID X Y Z R G B ERROR TRACK[] as (IMAGE_ID POINT2D_IDX)\n";
  for (const auto& [id, track] : scene.tracks) {
    std::string& out = text.points;
    out += std::to_string(id);
    out += ' ';
    append_double(&out, track.position.x());
    out += ' ';
    append_double(&out, track.position.y());
    out += ' ';
    append_double(&out, track.position.z());
    out += " 128 128 128 0";
    for (const auto& [image_id, idx] : track_elements[id]) {
      out += ' ';
      out += std::to_string(image_id);
      out += ' ';
      out += std::to_string(idx);
    }
    out += '\n';
  }

  return text;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw ParseError(path.string() + ": cannot open file");
  }
  std::ostringstream out;
  out << stream.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw Error("cannot write " + path.string());
  }
  stream << content;
}

}  // namespace

SceneModel load_scene_dir(const std::string& dir, const ParseOptions& options) {
  const std::filesystem::path base(dir);
  return parse_scene(read_file(base / "cameras.txt"), read_file(base / "images.txt"),
                     read_file(base / "points3D.txt"), options);
}

void save_scene_dir(const SceneModel& scene, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  const SceneText text = write_scene(scene);
  write_file(base / "cameras.txt", text.cameras);
  write_file(base / "images.txt", text.images);
  write_file(base / "points3D.txt", text.points);
}

}  // namespace psforge
