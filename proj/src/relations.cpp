#include "mirc/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mirc/error.hpp"

namespace mirc {

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::kExists: return "exists";
    case RelationKind::kTouch: return "touch";
    case RelationKind::kRelPos: return "relpos";
    case RelationKind::kContinuity: return "continuity";
    case RelationKind::kBounds: return "bounds";
    case RelationKind::kShape: return "shape";
  }
  return "unknown";
}

std::optional<RelationKind> relation_kind_from_string(std::string_view id) {
  for (auto k : {RelationKind::kExists, RelationKind::kTouch, RelationKind::kRelPos,
                 RelationKind::kContinuity, RelationKind::kBounds, RelationKind::kShape}) {
    if (to_string(k) == id) return k;
  }
  return std::nullopt;
}

std::size_t relation_dims(RelationKind kind) {
  switch (kind) {
    case RelationKind::kRelPos: return 8;
    case RelationKind::kShape: return 4;
    default: return 1;
  }
}

std::size_t relation_arity(RelationKind kind) {
  switch (kind) {
    case RelationKind::kExists:
    case RelationKind::kShape: return 1;
    default: return 2;
  }
}

bool operand_kind_ok(RelationKind kind, std::size_t operand, PrimitiveKind prim) {
  switch (kind) {
    case RelationKind::kExists:
    case RelationKind::kTouch:
    case RelationKind::kRelPos: return true;
    case RelationKind::kContinuity: return prim == PrimitiveKind::kContour;
    case RelationKind::kBounds:
      return operand == 0 ? prim == PrimitiveKind::kContour : prim == PrimitiveKind::kRegion;
    case RelationKind::kShape: return prim == PrimitiveKind::kRegion;
  }
  return false;
}

Geometry::Geometry(Primitive prim) : primitive(std::move(prim)), kind(kind_of(primitive)) {
  samples = point_set(primitive);
  if (kind == PrimitiveKind::kRegion) {
    mask = std::get<Region>(primitive).mask;
    for (const auto& p : boundary_pixels(mask)) {
      outline.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    }
  } else {
    outline = samples;
  }
  if (!samples.empty()) {
    min_x = max_x = samples.front().x;
    min_y = max_y = samples.front().y;
  }
  for (const auto& s : samples) {
    sum_x += s.x;
    sum_y += s.y;
    min_x = std::min(min_x, s.x);
    max_x = std::max(max_x, s.x);
    min_y = std::min(min_y, s.y);
    max_y = std::max(max_y, s.y);
  }
  count = static_cast<double>(samples.size());
  if (kind == PrimitiveKind::kRegion && !mask.empty()) {
    bx_ = static_cast<int>(min_x);
    by_ = static_cast<int>(min_y);
    bw_ = static_cast<int>(max_x) - bx_ + 1;
    bh_ = static_cast<int>(max_y) - by_ + 1;
    bitmap_.assign(static_cast<std::size_t>(bw_) * bh_, false);
    for (const auto& p : mask) bitmap_[static_cast<std::size_t>(p.y - by_) * bw_ + (p.x - bx_)] = true;
  }
}

bool Geometry::covers(Pixel p) const {
  if (p.x < bx_ || p.y < by_ || p.x >= bx_ + bw_ || p.y >= by_ + bh_) return false;
  return bitmap_[static_cast<std::size_t>(p.y - by_) * bw_ + (p.x - bx_)];
}

namespace {

bool integral(const Vec2& v) { return v.x == std::floor(v.x) && v.y == std::floor(v.y); }

// True when some sample of `probe` lies inside the mask of `region`. Samples
// at fractional coordinates inside the region's box fall back to brute force
// by returning nullopt.
std::optional<bool> overlaps_region(const Geometry& probe, const Geometry& region) {
  for (const auto& s : probe.samples) {
    if (s.x < region.min_x - 1 || s.x > region.max_x + 1 || s.y < region.min_y - 1 ||
        s.y > region.max_y + 1) {
      continue;
    }
    if (!integral(s)) return std::nullopt;
    if (region.covers({static_cast<int>(s.x), static_cast<int>(s.y)})) return true;
  }
  return false;
}

double brute_min_sq(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a) {
    for (const auto& q : b) {
      const double dx = p.x - q.x, dy = p.y - q.y;
      best = std::min(best, dx * dx + dy * dy);
    }
  }
  return best;
}

}  // namespace

double min_distance(const Geometry& a, const Geometry& b) {
  if (a.samples.empty() || b.samples.empty()) return std::numeric_limits<double>::infinity();
  const bool ra = a.kind == PrimitiveKind::kRegion;
  const bool rb = b.kind == PrimitiveKind::kRegion;
  if (!ra && !rb) return std::sqrt(brute_min_sq(a.samples, b.samples));
  // A closest pair between a pixel set and anything outside it always uses a
  // 4-boundary pixel, so the full mask is only needed to detect overlap.
  std::optional<bool> hit;
  if (ra && rb) {
    const Geometry& small = a.samples.size() <= b.samples.size() ? a : b;
    const Geometry& large = &small == &a ? b : a;
    hit = overlaps_region(small, large);
  } else {
    hit = overlaps_region(ra ? b : a, ra ? a : b);
  }
  if (!hit) return std::sqrt(brute_min_sq(a.samples, b.samples));
  if (*hit) return 0.0;
  return std::sqrt(brute_min_sq(a.outline, b.outline));
}

double rel_exists(const Primitive* p, const RelationParams& params, ImageDims dims) {
  if (p == nullptr) return 0.0;
  double strength = std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointFeature>) {
          return v.strength;
        } else if constexpr (std::is_same_v<T, Contour>) {
          return v.mean_strength;
        } else {
          const double area = static_cast<double>(dims.width) * dims.height;
          return area > 0 ? v.area / area : 0.0;
        }
      },
      *p);
  if (params.strength_scale <= 0.0) return strength > 0.0 ? 1.0 : 0.0;
  return std::clamp(strength / params.strength_scale, 0.0, 1.0);
}

double rel_touch(const Geometry& a, const Geometry& b, double tol) {
  return std::exp(-min_distance(a, b) / tol);
}

double rel_touch(const Primitive& a, const Primitive& b, double tol) {
  return rel_touch(Geometry(a), Geometry(b), tol);
}

std::array<double, 8> rel_relative_position(const Geometry& a, const Geometry& b) {
  std::array<double, 8> out{};
  // Differences of centroids from integer-valued sums keep the result
  // exactly translation invariant.
  const double denom = a.count * b.count;
  const double dx = (b.sum_x * a.count - a.sum_x * b.count) / denom;
  const double dy = (b.sum_y * a.count - a.sum_y * b.count) / denom;
  if (dx == 0.0 && dy == 0.0) {
    out.fill(1.0 / 8.0);
    return out;
  }
  // Image y points down; bins run counter-clockwise from East.
  double angle = std::atan2(-dy, dx);
  if (angle < 0.0) angle += 2.0 * std::numbers::pi;
  const double t = angle / (std::numbers::pi / 4.0);
  double base = std::floor(t);
  double frac = t - base;
  const int k = static_cast<int>(base) % 8;
  out[static_cast<std::size_t>(k)] += 1.0 - frac;
  out[static_cast<std::size_t>((k + 1) % 8)] += frac;
  return out;
}

std::array<double, 8> rel_relative_position(const Primitive& a, const Primitive& b) {
  return rel_relative_position(Geometry(a), Geometry(b));
}

namespace {

struct EndTangent {
  Vec2 end;
  Vec2 outward;
};

std::array<EndTangent, 2> end_tangents(const Contour& c) {
  const auto n = c.points.size();
  const std::size_t k = std::min<std::size_t>(3, n - 1);
  const auto& f = c.points.front();
  const auto& fi = c.points[k];
  const auto& b = c.points.back();
  const auto& bi = c.points[n - 1 - k];
  return {EndTangent{f, {f.x - fi.x, f.y - fi.y}}, EndTangent{b, {b.x - bi.x, b.y - bi.y}}};
}

}  // namespace

double rel_continuity(const Contour& c1, const Contour& c2, double tol) {
  if (c1.closed || c2.closed || c1.points.size() < 2 || c2.points.size() < 2) return 0.0;
  const bool same = c1 == c2;
  const auto e1 = end_tangents(c1);
  const auto e2 = end_tangents(c2);
  double best = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      if (same && i == j) continue;
      const auto& a = e1[i];
      const auto& b = e2[j];
      const double gap = std::hypot(a.end.x - b.end.x, a.end.y - b.end.y);
      const double na = a.outward.x * a.outward.x + a.outward.y * a.outward.y;
      const double nb = b.outward.x * b.outward.x + b.outward.y * b.outward.y;
      if (na == 0.0 || nb == 0.0) continue;
      const double dot = a.outward.x * b.outward.x + a.outward.y * b.outward.y;
      const double cos2 = std::clamp(dot * dot / (na * nb), 0.0, 1.0);
      best = std::max(best, std::exp(-gap / tol) * cos2);
    }
  }
  return best;
}

double rel_contour_bounds_region(const Contour& c, const Region& r) {
  if (c.points.empty()) return 0.0;
  const auto boundary = boundary_pixels(r.mask);
  if (boundary.empty()) return 0.0;
  constexpr double kReach2 = 1.5 * 1.5;
  std::size_t near = 0;
  for (const auto& p : c.points) {
    for (const auto& q : boundary) {
      const double dx = p.x - q.x, dy = p.y - q.y;
      if (dx * dx + dy * dy <= kReach2) {
        ++near;
        break;
      }
    }
  }
  return static_cast<double>(near) / static_cast<double>(c.points.size());
}

namespace {

long long cross(const Pixel& o, const Pixel& a, const Pixel& b) {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
         static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

std::vector<Pixel> convex_hull(std::vector<Pixel> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pixel& a, const Pixel& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  if (pts.size() < 3) return pts;
  std::vector<Pixel> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double point_segment_distance(const Pixel& p, const Pixel& a, const Pixel& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

}  // namespace

std::array<double, 4> shape_descriptor(const Region& r, ImageDims dims) {
  std::array<double, 4> out{};
  if (r.mask.empty()) return out;
  const double area = static_cast<double>(r.mask.size());
  const double image_area = static_cast<double>(dims.width) * dims.height;
  out[0] = image_area > 0 ? std::min(1.0, area / image_area) : 0.0;

  double mx = 0, my = 0;
  int x0 = r.mask.front().x, x1 = x0, y0 = r.mask.front().y, y1 = y0;
  for (const auto& p : r.mask) {
    mx += p.x;
    my += p.y;
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  mx /= area;
  my /= area;
  double cxx = 0, cyy = 0, cxy = 0;
  for (const auto& p : r.mask) {
    cxx += (p.x - mx) * (p.x - mx);
    cyy += (p.y - my) * (p.y - my);
    cxy += (p.x - mx) * (p.y - my);
  }
  cxx /= area;
  cyy /= area;
  cxy /= area;
  const double half_tr = 0.5 * (cxx + cyy);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy));
  const double l1 = half_tr + disc;
  const double l2 = half_tr - disc;
  if (l1 <= 0.0 || l2 <= 1e-12 * std::max(1.0, l1)) {
    out[1] = 1.0;  // collinear or single pixel
  } else {
    out[1] = std::clamp(1.0 - l2 / l1, 0.0, 1.0);
  }

  const double box = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
  out[2] = area / box;

  const auto boundary = boundary_pixels(r.mask);
  const auto hull = convex_hull(boundary);
  std::size_t on_hull = 0;
  for (const auto& p : boundary) {
    double d = std::numeric_limits<double>::infinity();
    if (hull.size() == 1) {
      d = std::hypot(p.x - hull[0].x, p.y - hull[0].y);
    } else {
      for (std::size_t i = 0; i < hull.size(); ++i) {
        d = std::min(d, point_segment_distance(p, hull[i], hull[(i + 1) % hull.size()]));
      }
    }
    if (d <= 0.5) ++on_hull;
  }
  out[3] = boundary.empty() ? 0.0 : static_cast<double>(on_hull) / boundary.size();
  return out;
}

std::vector<double> evaluate_relation(RelationKind kind, const RelationParams& params,
                                      const Geometry* a, const Geometry* b, ImageDims dims) {
  const auto dim = relation_dims(kind);
  if (a == nullptr || (relation_arity(kind) == 2 && b == nullptr)) {
    return std::vector<double>(dim, 0.0);
  }
  switch (kind) {
    case RelationKind::kExists: return {rel_exists(&a->primitive, params, dims)};
    case RelationKind::kTouch: return {rel_touch(*a, *b, params.tol)};
    case RelationKind::kRelPos: {
      const auto v = rel_relative_position(*a, *b);
      return {v.begin(), v.end()};
    }
    case RelationKind::kContinuity:
      return {rel_continuity(std::get<Contour>(a->primitive), std::get<Contour>(b->primitive),
                             params.tol)};
    case RelationKind::kBounds:
      return {rel_contour_bounds_region(std::get<Contour>(a->primitive),
                                        std::get<Region>(b->primitive))};
    case RelationKind::kShape: {
      const auto v = shape_descriptor(std::get<Region>(a->primitive), dims);
      return {v.begin(), v.end()};
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown relation kind");
}

}  // namespace mirc
