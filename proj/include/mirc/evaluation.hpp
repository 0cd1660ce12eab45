#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirc/model.hpp"

namespace mirc {

/// Pixel mask of a primitive, sorted in raster order and clipped to dims.
/// Regions give their mask, contours their polyline pixels dilated by a
/// 3x3 square, points the 3x3 block around the rounded position.
std::vector<Pixel> rasterize(const Primitive& p, ImageDims dims);

/// Pixels of the polyline through the rounded contour points (undilated).
std::vector<Pixel> polyline_pixels(const std::vector<Vec2>& points);

/// |a ∩ b| / |a ∪ b| of sorted masks; two empty masks give 1.
double jaccard(const std::vector<Pixel>& a, const std::vector<Pixel>& b);

struct Classification {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy() const;
  void add(bool predicted_positive, bool actually_positive);
};

struct EvalResult {
  std::map<std::string, double> jaccard;  // components with non-null gold
  double mean_jaccard = 0.0;
  std::size_t matched_components = 0;  // non-null prediction overlapping gold
  std::optional<Classification> classification;
};

EvalResult jaccard_correspondence(const Assignment& pred, const Assignment& gold, ImageDims dims);

/// Per-image evaluation rows plus aggregate.
struct EvalRow {
  std::string id;
  EvalResult result;
  bool label_positive = true;
  bool predicted_positive = true;
  double score = 0.0;
};

std::string eval_csv(const std::vector<EvalRow>& rows, const std::vector<std::string>& components);

struct EvalSummary {
  double mean_jaccard = 0.0;
  std::map<std::string, double> component_means;
  Classification classification;
};
EvalSummary summarize(const std::vector<EvalRow>& rows);

}  // namespace mirc
