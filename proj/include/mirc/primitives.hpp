#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "mirc/image.hpp"

namespace mirc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

enum class PointKind { kContourEndpoint, kJunction, kGradientPeak };
std::string_view to_string(PointKind kind);

struct PointFeature {
  Vec2 position;
  PointKind kind = PointKind::kGradientPeak;
  double strength = 0.0;
  friend bool operator==(const PointFeature&, const PointFeature&) = default;
};

struct Contour {
  std::vector<Vec2> points;
  double mean_strength = 0.0;
  bool closed = false;
  friend bool operator==(const Contour&, const Contour&) = default;
};

/// Mask pixels are kept sorted in raster order.
struct Region {
  std::vector<Pixel> mask;
  int area = 0;
  Vec2 centroid;
  double mean_intensity = 0.0;
  friend bool operator==(const Region&, const Region&) = default;
};

enum class PrimitiveKind { kPoint, kContour, kRegion };
std::string_view to_string(PrimitiveKind kind);

using Primitive = std::variant<PointFeature, Contour, Region>;

PrimitiveKind kind_of(const Primitive& p);

struct PrimitiveSet {
  std::vector<PointFeature> points;
  std::vector<Contour> contours;
  std::vector<Region> regions;
  int width = 0;
  int height = 0;

  std::size_t count(PrimitiveKind kind) const;
  Primitive get(PrimitiveKind kind, std::size_t index) const;
  friend bool operator==(const PrimitiveSet&, const PrimitiveSet&) = default;
};

struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<double> orientation;  // [0, pi)
  /// True where the signed gradient points along orientation + pi.
  std::vector<bool> reversed;

  double mag(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
  double ori(int x, int y) const { return orientation[static_cast<std::size_t>(y) * width + x]; }
};

struct ContourParams {
  double mag_threshold = 20.0;
  double min_contour_length = 4.0;
  /// At a fork, a chain stops unless its smoothest continuation turns by
  /// at most this angle.
  double fork_turn_limit_deg = 0.0;
  /// Closed chains are cut where they turn by more than this over 3 steps.
  double reversal_limit_deg = 110.0;
  /// Same for open chains.
  double corner_limit_deg = 60.0;
};

struct PointParams {
  double blob_threshold = 20.0;
};

struct RegionParams {
  int num_levels = 4;
  int min_region_area = 6;
};

struct ExtractionParams {
  ContourParams contour;
  PointParams point;
  RegionParams region;
};

/// Central differences; border pixels carry magnitude 0.
GradientField gradient_map(const Image& img);

/// Boolean map of pixels surviving non-maximum suppression and the threshold.
std::vector<bool> edge_map(const GradientField& grad, double mag_threshold);

std::vector<Contour> extract_contours(const Image& img, const ContourParams& params = {});

/// Blob response used for GradientPeak points: |mean(3x3) - mean(5x5 ring)|.
double blob_response(const Image& img, int x, int y);

std::vector<PointFeature> extract_points(const Image& img, const std::vector<Contour>& contours,
                                         const PointParams& params = {});

std::vector<Region> extract_regions(const Image& img, const RegionParams& params = {});

PrimitiveSet extract_primitives(const Image& img, const ExtractionParams& params = {});

double arc_length(const Contour& c);

/// Region helpers.
Region make_region(std::vector<Pixel> mask, const Image* img = nullptr);
std::vector<Pixel> boundary_pixels(const std::vector<Pixel>& sorted_mask);
bool mask_contains(const std::vector<Pixel>& sorted_mask, Pixel p);

/// Every geometric sample of a primitive: polyline points, mask pixels, or
/// the single position.
std::vector<Vec2> point_set(const Primitive& p);
Vec2 centroid(const Primitive& p);

Primitive translated(const Primitive& p, double dx, double dy);

}  // namespace mirc
