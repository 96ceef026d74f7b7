#pragma once

#include <string>

#include "psforge/scene.hpp"

namespace psforge {

// Layout of the per-image keypoint line in images.txt.
//   kStandard: X Y POINT3D_ID triples (plain COLMAP); feature scale and
//              orientation are filled from the parser defaults.
//   kExtended: X Y SCALE ORIENTATION POINT3D_ID five-tuples, which is
//              what write_scene emits.
//   kAuto:     extended when the token count is divisible by 5,
//              otherwise standard.
enum class KeypointFormat { kAuto, kStandard, kExtended };

struct ParseOptions {
  KeypointFormat keypoint_format = KeypointFormat::kAuto;
  // Used for observations parsed from standard keypoint lines, which do
  // not carry scale/orientation.
  double default_scale = 2.0;
  double default_orientation_rad = 0.0;
};

struct SceneText {
  std::string cameras;
  std::string images;
  std::string points;
};

// Parses a COLMAP sparse text model. Only SIMPLE_PINHOLE and PINHOLE
// (with isotropic focal) camera models are accepted. The returned model
// is fully cross-referenced and validated.
// Throws ParseError with a line number for malformed input and
// IntegrityError for dangling references or invariant violations.
SceneModel parse_scene(const std::string& cameras_text, const std::string& images_text,
                       const std::string& points_text, const ParseOptions& options = {});

// Serializes a model back to COLMAP text. Cameras are written as
// SIMPLE_PINHOLE and keypoint lines in the extended format, so
// parse_scene(write_scene(m)) reproduces m to within 1e-9.
// Validates the model first and throws IntegrityError if it is broken.
SceneText write_scene(const SceneModel& scene);

// Convenience wrappers reading/writing cameras.txt, images.txt and
// points3D.txt inside a directory.
SceneModel load_scene_dir(const std::string& dir, const ParseOptions& options = {});
void save_scene_dir(const SceneModel& scene, const std::string& dir);

}  // namespace psforge
