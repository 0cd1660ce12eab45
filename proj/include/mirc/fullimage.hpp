#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirc/image.hpp"
#include "mirc/model.hpp"
#include "mirc/primitives.hpp"
#include "mirc/search.hpp"

namespace mirc {

/// One accepted window. The interpretation lives in the coordinates of the
/// (possibly resampled) window; to_global maps it back.
struct DetectedConfiguration {
  Box window;            // full-image coordinates
  double scale = 1.0;    // resize factor applied to the full image
  std::size_t model = 0; // index into the scanned model list
  Interpretation interpretation;
  double score = 0.0;
  /// Set by refine: the score before refinement.
  std::optional<double> unrefined_score;
};

struct ScanParams {
  int stride = 6;
  std::vector<double> scales{1.0, 0.75, 0.5};
  double nms_iou = 0.5;
  SearchConfig search;
  ExtractionParams extraction;
  /// Worker threads for window interpretation; 0 = hardware concurrency.
  unsigned threads = 0;
};

struct ScanResult {
  std::vector<DetectedConfiguration> detections;  // descending score
  /// The image was smaller than the window at every scale.
  bool too_small = false;
  std::size_t windows_evaluated = 0;
};

ScanResult scan(const Image& image, const std::vector<InterpretationModel>& models,
                const ScanParams& params = {});

/// Greedy NMS over windows: higher score first, drop anything with
/// IoU > max_iou against a kept window.
std::vector<DetectedConfiguration> non_max_suppression(std::vector<DetectedConfiguration> dets,
                                                       double max_iou);

/// Re-extracts primitives from the untouched full-resolution window and
/// interprets them again; the window-local frame becomes scale 1.
DetectedConfiguration refine(const DetectedConfiguration& det, const Image& full,
                             const InterpretationModel& model, const SearchConfig& search = {},
                             const ExtractionParams& extraction = {});

/// Window-local primitive -> full-image coordinates. Regions map each
/// pixel to the block of full-image pixels it covers.
Primitive to_global(const Primitive& local, const DetectedConfiguration& det);
/// Inverse of to_global for scale-1 detections (exact for integer geometry).
Primitive to_local(const Primitive& global, const DetectedConfiguration& det);

struct ComponentClaim {
  std::string component;
  Primitive primitive;        // highest-confidence claim, full-image coordinates
  std::vector<Pixel> mask;    // union of the merged claims' rasters
  double confidence = 0.0;    // max score over merged claims
  std::vector<std::size_t> windows;  // indices into the detection list
};

struct GlobalInterpretation {
  std::vector<ComponentClaim> claims;
  std::vector<Box> contributing_windows;

  std::size_t count(const std::string& component) const;
};

/// Maps every claim to full-image coordinates and resolves overlaps: claims
/// of one component from overlapping windows merge when their rasters have
/// IoU >= 0.5, otherwise the lower-score claim is dropped.
GlobalInterpretation combine(const std::vector<DetectedConfiguration>& dets, ImageDims full);

std::string scan_to_json(const ScanResult& result, const GlobalInterpretation& global,
                         const std::vector<InterpretationModel>& models);

}  // namespace mirc
