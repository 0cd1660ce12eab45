#include "mirc/config.hpp"

#include "json.hpp"
#include "mirc/error.hpp"
#include "mirc/serialize.hpp"

namespace mirc {

using nlohmann::json;

namespace {

// One list of (section, key, field) drives both directions.
template <class F>
void visit_fields(RunConfig& c, F&& f) {
  f("", "seed", c.seed);
  f("extraction", "mag_threshold", c.extraction.contour.mag_threshold);
  f("extraction", "min_contour_length", c.extraction.contour.min_contour_length);
  f("extraction", "fork_turn_limit_deg", c.extraction.contour.fork_turn_limit_deg);
  f("extraction", "reversal_limit_deg", c.extraction.contour.reversal_limit_deg);
  f("extraction", "corner_limit_deg", c.extraction.contour.corner_limit_deg);
  f("extraction", "blob_threshold", c.extraction.point.blob_threshold);
  f("extraction", "num_levels", c.extraction.region.num_levels);
  f("extraction", "min_region_area", c.extraction.region.min_region_area);
  f("search", "max_candidates", c.search.max_candidates);
  f("search", "beam_width", c.search.beam_width);
  f("search", "exact_limit", c.search.exact_limit);
  f("grounding", "min_region_iou", c.grounding.min_region_iou);
  f("grounding", "max_contour_distance", c.grounding.max_contour_distance);
  f("grounding", "max_point_distance", c.grounding.max_point_distance);
  f("train", "epochs", c.epochs);
  f("train", "averaging", c.averaging);
  f("train", "learning_rate", c.learning_rate);
  f("train", "margin", c.margin);
  f("train", "shuffle", c.shuffle);
  f("reduce", "factor", c.reduce_factor);
  f("scan", "stride", c.stride);
  f("scan", "scales", c.scales);
  f("scan", "nms_iou", c.nms_iou);
  f("scan", "threads", c.threads);
  f("gen", "width", c.glyph_width);
  f("gen", "height", c.glyph_height);
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.averaging = averaging;
  t.learning_rate = learning_rate;
  t.margin = margin;
  t.search = search;
  t.extraction = extraction;
  t.grounding = grounding;
  if (shuffle) t.shuffle_seed = seed;
  return t;
}

ScanParams RunConfig::scan_params() const {
  ScanParams p;
  p.stride = stride;
  p.scales = scales;
  p.nms_iou = nms_iou;
  p.search = search;
  p.extraction = extraction;
  p.threads = threads;
  return p;
}

std::string config_to_json(const RunConfig& config) {
  RunConfig c = config;
  json j = json::object();
  visit_fields(c, [&](const char* section, const char* key, auto& field) {
    if (*section) {
      j[section][key] = field;
    } else {
      j[key] = field;
    }
  });
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be an object");
  // Known keys, to reject anything else.
  json known = json::parse(config_to_json(base));
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw Error(ErrorCode::kInvalidConfig, "unknown config key: " + k);
    if (known[k].is_object()) {
      if (!v.is_object()) throw Error(ErrorCode::kInvalidConfig, "config section must be an object: " + k);
      for (const auto& [k2, v2] : v.items()) {
        if (!known[k].contains(k2)) {
          throw Error(ErrorCode::kInvalidConfig, "unknown config key: " + k + "." + k2);
        }
      }
    }
  }
  visit_fields(base, [&](const char* section, const char* key, auto& field) {
    const json* node = &j;
    if (*section) {
      if (!j.contains(section)) return;
      node = &j[section];
    }
    if (!node->contains(key)) return;
    try {
      node->at(key).get_to(field);
    } catch (const json::exception&) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string("bad value for ") + (*section ? std::string(section) + "." : "") + key);
    }
  });
  return base;
}

RunConfig load_config(const std::string& path) { return config_from_json(read_text_file(path)); }

}  // namespace mirc
