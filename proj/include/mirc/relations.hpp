#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "mirc/primitives.hpp"

namespace mirc {

/// Relation kinds and their string ids in model files.
enum class RelationKind { kExists, kTouch, kRelPos, kContinuity, kBounds, kShape };

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> relation_kind_from_string(std::string_view id);

/// Output dimension of a relation kind.
std::size_t relation_dims(RelationKind kind);
/// Number of operands a relation kind takes.
std::size_t relation_arity(RelationKind kind);
/// Whether operand i of the relation accepts a primitive of the given kind.
bool operand_kind_ok(RelationKind kind, std::size_t operand, PrimitiveKind prim);

struct RelationParams {
  double tol = 2.0;             // px, distance decay for touch / continuity
  double strength_scale = 50.0; // saturation point for exists
  friend bool operator==(const RelationParams&, const RelationParams&) = default;
};

struct ImageDims {
  int width = 0;
  int height = 0;
};

/// Precomputed geometry of a primitive; relation evaluation over many
/// candidate pairs reuses it.
struct Geometry {
  explicit Geometry(Primitive prim);

  Primitive primitive;
  PrimitiveKind kind;
  std::vector<Vec2> samples;   // full point set
  std::vector<Vec2> outline;   // samples that can realize a minimum distance
  std::vector<Pixel> mask;     // regions only, sorted
  double sum_x = 0.0, sum_y = 0.0;
  double count = 0.0;
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

  /// Mask membership for regions, O(1) through a bounding-box bitmap.
  bool covers(Pixel p) const;

 private:
  std::vector<bool> bitmap_;
  int bx_ = 0, by_ = 0, bw_ = 0, bh_ = 0;
};

/// Minimum Euclidean distance between the point sets of two primitives.
double min_distance(const Geometry& a, const Geometry& b);

double rel_exists(const Primitive* p, const RelationParams& params, ImageDims dims);
double rel_touch(const Primitive& a, const Primitive& b, double tol);
std::array<double, 8> rel_relative_position(const Primitive& a, const Primitive& b);
double rel_continuity(const Contour& c1, const Contour& c2, double tol);
double rel_contour_bounds_region(const Contour& c, const Region& r);
std::array<double, 4> shape_descriptor(const Region& r, ImageDims dims);

double rel_touch(const Geometry& a, const Geometry& b, double tol);
std::array<double, 8> rel_relative_position(const Geometry& a, const Geometry& b);

/// Evaluates a relation on operand geometries (null = absent). Absent
/// operands yield the all-zero missing value.
std::vector<double> evaluate_relation(RelationKind kind, const RelationParams& params,
                                      const Geometry* a, const Geometry* b, ImageDims dims);

}  // namespace mirc
