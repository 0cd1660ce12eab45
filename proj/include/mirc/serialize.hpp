#pragma once

#include <string>

#include "json.hpp"
#include "mirc/image.hpp"
#include "mirc/model.hpp"
#include "mirc/primitives.hpp"

namespace mirc {

nlohmann::json primitive_to_json(const Primitive& p);
Primitive primitive_from_json(const nlohmann::json& j);

nlohmann::json assignment_to_json(const Assignment& a);
Assignment assignment_from_json(const nlohmann::json& j);

std::string primitives_to_json(const PrimitiveSet& set);
PrimitiveSet primitives_from_json(const std::string& text);

/// Assignment, score and feature vector. threshold is recorded when given.
std::string interpretation_to_json(const Interpretation& interp, const InterpretationModel& model);

/// Gold annotation file: component -> geometry, plus an optional label.
struct Annotation {
  Assignment gold;
  std::optional<bool> positive;
};
std::string annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const std::string& text);

/// Training/evaluation corpus listing. Paths in the file are relative to
/// the manifest's directory; load_manifest resolves them.
struct ManifestEntry {
  std::string id;
  std::string image;
  std::string gold;
  bool positive = true;
};
std::string manifest_to_json(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::string& path);

struct SvgLayer {
  Assignment assignment;
  std::string label;  // drawn in the top-left corner when non-empty
};

/// The image (embedded PNG) with regions as translucent fills, contours as
/// colored polylines and points as markers. Colors follow component order.
std::string render_svg(const Image& image, const std::vector<SvgLayer>& layers, int pixel_scale = 8);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mirc
