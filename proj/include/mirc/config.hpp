#pragma once

#include <cstdint>
#include <string>

#include "mirc/fullimage.hpp"
#include "mirc/learning.hpp"
#include "mirc/primitives.hpp"
#include "mirc/search.hpp"

namespace mirc {

/// Every tunable of the pipeline in one place. Config files use the JSON
/// layout of to_json(); absent keys keep their defaults, unknown keys throw
/// Error(kInvalidConfig).
struct RunConfig {
  std::uint32_t seed = 0;
  ExtractionParams extraction;
  SearchConfig search;
  GroundingParams grounding;

  int epochs = 20;
  bool averaging = true;
  double learning_rate = 1.0;
  double margin = 0.0;
  bool shuffle = false;  // shuffle with `seed` each epoch

  double reduce_factor = 0.8;

  int stride = 6;
  std::vector<double> scales{1.0, 0.75, 0.5};
  double nms_iou = 0.5;
  unsigned threads = 0;

  int glyph_width = 30;
  int glyph_height = 30;

  TrainConfig train_config() const;
  ScanParams scan_params() const;
};

std::string config_to_json(const RunConfig& config);
/// Applies the keys present in text on top of base.
RunConfig config_from_json(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path);

}  // namespace mirc
