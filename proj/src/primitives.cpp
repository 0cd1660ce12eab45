#include "mirc/primitives.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "mirc/error.hpp"

namespace mirc {

std::string_view to_string(PointKind kind) {
  switch (kind) {
    case PointKind::kContourEndpoint: return "endpoint";
    case PointKind::kJunction: return "junction";
    case PointKind::kGradientPeak: return "peak";
  }
  return "unknown";
}

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kPoint: return "point";
    case PrimitiveKind::kContour: return "contour";
    case PrimitiveKind::kRegion: return "region";
  }
  return "unknown";
}

PrimitiveKind kind_of(const Primitive& p) {
  return static_cast<PrimitiveKind>(p.index());
}

std::size_t PrimitiveSet::count(PrimitiveKind kind) const {
  switch (kind) {
    case PrimitiveKind::kPoint: return points.size();
    case PrimitiveKind::kContour: return contours.size();
    case PrimitiveKind::kRegion: return regions.size();
  }
  return 0;
}

Primitive PrimitiveSet::get(PrimitiveKind kind, std::size_t index) const {
  switch (kind) {
    case PrimitiveKind::kPoint: return points.at(index);
    case PrimitiveKind::kContour: return contours.at(index);
    case PrimitiveKind::kRegion: return regions.at(index);
  }
  throw Error(ErrorCode::kInvalidArgument, "bad primitive kind");
}

namespace {

constexpr std::array<Pixel, 8> kRing = {
    Pixel{1, 0}, Pixel{1, 1}, Pixel{0, 1}, Pixel{-1, 1},
    Pixel{-1, 0}, Pixel{-1, -1}, Pixel{0, -1}, Pixel{1, -1}};

// Scan order for tie-breaking among neighbours: raster order.
constexpr std::array<Pixel, 8> kRaster = {
    Pixel{-1, -1}, Pixel{0, -1}, Pixel{1, -1}, Pixel{-1, 0},
    Pixel{1, 0}, Pixel{-1, 1}, Pixel{0, 1}, Pixel{1, 1}};

double fold_pi(double a) {
  constexpr double pi = std::numbers::pi;
  if (a < 0.0) a += pi;
  if (a >= pi) a -= pi;
  if (a < 0.0) a = 0.0;
  return a;
}

double orientation_gap(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, std::numbers::pi - d);
}

}  // namespace

GradientField gradient_map(const Image& img) {
  if (img.width() < 3 || img.height() < 3) {
    throw Error(ErrorCode::kImageTooSmall, "gradient_map needs at least 3x3");
  }
  GradientField g;
  g.width = img.width();
  g.height = img.height();
  const auto n = static_cast<std::size_t>(g.width) * g.height;
  g.magnitude.assign(n, 0.0);
  g.orientation.assign(n, 0.0);
  g.reversed.assign(n, false);
  for (int y = 1; y + 1 < g.height; ++y) {
    for (int x = 1; x + 1 < g.width; ++x) {
      const double gx = (static_cast<double>(img.at(x + 1, y)) - img.at(x - 1, y)) / 2.0;
      const double gy = (static_cast<double>(img.at(x, y + 1)) - img.at(x, y - 1)) / 2.0;
      const auto i = static_cast<std::size_t>(y) * g.width + x;
      g.magnitude[i] = std::hypot(gx, gy);
      if (g.magnitude[i] > 0.0) {
        const double a = std::atan2(gy, gx);
        g.orientation[i] = fold_pi(a);
        g.reversed[i] = std::abs(g.orientation[i] - a) > 1e-9;
      }
    }
  }
  return g;
}

std::vector<bool> edge_map(const GradientField& grad, double mag_threshold) {
  constexpr double pi = std::numbers::pi;
  constexpr double kPlateauRatio = 0.8;
  std::vector<bool> edges(grad.magnitude.size(), false);
  auto mag_at = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= grad.width || y >= grad.height) return 0.0;
    return grad.mag(x, y);
  };
  for (int y = 0; y < grad.height; ++y) {
    for (int x = 0; x < grad.width; ++x) {
      const double m = grad.mag(x, y);
      if (m < mag_threshold || m <= 0.0) continue;
      const double a = grad.ori(x, y);
      int dx = 1, dy = 0;
      if (a >= pi / 8 && a < 3 * pi / 8) {
        dx = 1; dy = 1;
      } else if (a >= 3 * pi / 8 && a < 5 * pi / 8) {
        dx = 0; dy = 1;
      } else if (a >= 5 * pi / 8 && a < 7 * pi / 8) {
        dx = -1; dy = 1;
      }
      // Central differences put a step edge on a two-pixel plateau, where
      // noise alone would pick the survivor. The brighter-side pixel wins
      // unless its neighbour is clearly stronger.
      // Orientations near pi quantize to (1, 0), which points the other way.
      if (grad.reversed[static_cast<std::size_t>(y) * grad.width + x] != (a >= 7 * pi / 8)) {
        dx = -dx;
        dy = -dy;
      }
      const double bright = mag_at(x + dx, y + dy);
      const double dark = mag_at(x - dx, y - dy);
      if (bright < kPlateauRatio * m && dark * kPlateauRatio <= m) {
        edges[static_cast<std::size_t>(y) * grad.width + x] = true;
      }
    }
  }
  return edges;
}

double arc_length(const Contour& c) {
  double len = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    len += std::hypot(c.points[i].x - c.points[i - 1].x, c.points[i].y - c.points[i - 1].y);
  }
  if (c.closed && c.points.size() > 2) {
    len += std::hypot(c.points.front().x - c.points.back().x,
                      c.points.front().y - c.points.back().y);
  }
  return len;
}

namespace {

class ChainLinker {
 public:
  ChainLinker(const GradientField& grad, const std::vector<bool>& edges, double fork_turn_limit)
      : grad_(grad), edges_(edges), visited_(edges.size(), false),
        fork_turn_limit_(fork_turn_limit) {}

  std::vector<std::vector<Pixel>> link() {
    std::vector<std::vector<Pixel>> chains;
    // Open chains first, started from their endpoints in raster order.
    for (int y = 0; y < grad_.height; ++y)
      for (int x = 0; x < grad_.width; ++x)
        if (is_edge(x, y) && !seen(x, y) && edge_degree({x, y}) <= 1)
          chains.push_back(trace({x, y}));
    // Whatever remains lies on loops or branches off already traced chains.
    for (int y = 0; y < grad_.height; ++y)
      for (int x = 0; x < grad_.width; ++x)
        if (is_edge(x, y) && !seen(x, y)) chains.push_back(trace({x, y}));
    return chains;
  }

 private:
  bool is_edge(int x, int y) const {
    return x >= 0 && y >= 0 && x < grad_.width && y < grad_.height &&
           edges_[static_cast<std::size_t>(y) * grad_.width + x];
  }
  bool seen(int x, int y) const { return visited_[static_cast<std::size_t>(y) * grad_.width + x]; }
  void mark(Pixel p) { visited_[static_cast<std::size_t>(p.y) * grad_.width + p.x] = true; }

  int edge_degree(Pixel p) const {
    int n = 0;
    for (auto d : kRing) n += is_edge(p.x + d.x, p.y + d.y) ? 1 : 0;
    return n;
  }

  // Number of separate runs of edge pixels around the 8-ring; >= 3 is a fork.
  int branch_count(Pixel p) const {
    int groups = 0;
    for (std::size_t k = 0; k < kRing.size(); ++k) {
      const auto& d = kRing[k];
      const auto& prev = kRing[(k + kRing.size() - 1) % kRing.size()];
      if (is_edge(p.x + d.x, p.y + d.y) && !is_edge(p.x + prev.x, p.y + prev.y)) ++groups;
    }
    return groups;
  }

  // Next unvisited neighbour, preferring the smallest change of direction.
  std::optional<Pixel> step(Pixel cur, std::optional<Pixel> prev_dir) const {
    std::optional<Pixel> best;
    double best_cost = 0.0;
    for (auto d : kRaster) {
      const int nx = cur.x + d.x, ny = cur.y + d.y;
      if (!is_edge(nx, ny) || seen(nx, ny)) continue;
      double cost;
      if (prev_dir) {
        const double dot = d.x * prev_dir->x + d.y * prev_dir->y;
        const double norm = std::hypot(d.x, d.y) * std::hypot(prev_dir->x, prev_dir->y);
        cost = std::acos(std::clamp(dot / norm, -1.0, 1.0));
      } else {
        cost = orientation_gap(grad_.ori(nx, ny), grad_.ori(cur.x, cur.y));
      }
      // Axis steps win exact ties so staircases are not skipped over.
      if (d.x != 0 && d.y != 0) cost += 1e-9;
      if (!best || cost < best_cost) {
        best = Pixel{nx, ny};
        best_cost = cost;
      }
    }
    // At a fork the chain only goes on if some branch continues smoothly.
    if (best && prev_dir && best_cost > fork_turn_limit_ && branch_count(cur) >= 3) {
      return std::nullopt;
    }
    return best;
  }

  void extend(std::vector<Pixel>& chain) {
    std::optional<Pixel> dir;
    if (chain.size() >= 2) {
      const auto& a = chain[chain.size() - 2];
      const auto& b = chain.back();
      dir = Pixel{b.x - a.x, b.y - a.y};
    }
    while (auto next = step(chain.back(), dir)) {
      dir = Pixel{next->x - chain.back().x, next->y - chain.back().y};
      mark(*next);
      chain.push_back(*next);
    }
  }

  std::vector<Pixel> trace(Pixel start) {
    std::vector<Pixel> chain{start};
    mark(start);
    extend(chain);
    // Then grow the other way from the start pixel.
    std::vector<Pixel> back{start};
    if (chain.size() >= 2) {
      // Seed the reverse direction so the turn cost is measured against it.
      back.insert(back.begin(), chain[1]);
      extend(back);
      back.erase(back.begin());
    } else {
      extend(back);
    }
    if (back.size() > 1) {
      std::vector<Pixel> joined(back.rbegin(), back.rend() - 1);
      joined.insert(joined.end(), chain.begin(), chain.end());
      chain = std::move(joined);
    }
    return chain;
  }

  const GradientField& grad_;
  const std::vector<bool>& edges_;
  std::vector<bool> visited_;
  double fork_turn_limit_;
};

/// Splits a chain where it doubles back: the directions over `span` steps
/// before and after a pixel differ by more than `limit`. Only the sharpest
/// pixel of each such run is cut.
std::vector<std::vector<Pixel>> split_reversals(const std::vector<Pixel>& chain, int span,
                                                double limit) {
  const int n = static_cast<int>(chain.size());
  if (limit >= std::numbers::pi || n < 2 * span + 1) return {chain};
  std::vector<double> turn(chain.size(), 0.0);
  for (int i = span; i + span < n; ++i) {
    const auto& a = chain[static_cast<std::size_t>(i - span)];
    const auto& p = chain[static_cast<std::size_t>(i)];
    const auto& b = chain[static_cast<std::size_t>(i + span)];
    const double ax = p.x - a.x, ay = p.y - a.y, bx = b.x - p.x, by = b.y - p.y;
    turn[static_cast<std::size_t>(i)] = std::abs(std::atan2(ax * by - ay * bx, ax * bx + ay * by));
  }
  std::vector<std::vector<Pixel>> out(1);
  int i = 0;
  while (i < n) {
    if (turn[static_cast<std::size_t>(i)] > limit) {
      int best = i;
      int j = i;
      while (j < n && turn[static_cast<std::size_t>(j)] > limit) {
        if (turn[static_cast<std::size_t>(j)] > turn[static_cast<std::size_t>(best)]) best = j;
        ++j;
      }
      for (int k = i; k <= best; ++k) out.back().push_back(chain[static_cast<std::size_t>(k)]);
      out.emplace_back();
      i = best + 1;
      continue;
    }
    out.back().push_back(chain[static_cast<std::size_t>(i)]);
    ++i;
  }
  return out;
}

}  // namespace

std::vector<Contour> extract_contours(const Image& img, const ContourParams& params) {
  if (img.width() < 3 || img.height() < 3) return {};
  const auto grad = gradient_map(img);
  const auto edges = edge_map(grad, params.mag_threshold);
  ChainLinker linker(grad, edges, params.fork_turn_limit_deg * std::numbers::pi / 180.0);
  std::vector<std::vector<Pixel>> chains;
  constexpr double deg = std::numbers::pi / 180.0;
  for (auto& chain : linker.link()) {
    // Closed outlines stay whole unless they double back; open chains are
    // cut into smoothly continuing pieces.
    const bool closed = chain.size() >= 4 && std::abs(chain.front().x - chain.back().x) <= 1 &&
                        std::abs(chain.front().y - chain.back().y) <= 1;
    const double limit = closed ? params.reversal_limit_deg : params.corner_limit_deg;
    for (auto& piece : split_reversals(chain, 3, limit * deg)) chains.push_back(std::move(piece));
  }
  std::vector<Contour> out;
  for (auto& chain : chains) {
    if (chain.size() < 2) continue;
    Contour c;
    double sum = 0.0;
    c.points.reserve(chain.size());
    for (auto p : chain) {
      c.points.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
      sum += grad.mag(p.x, p.y);
    }
    c.mean_strength = sum / static_cast<double>(chain.size());
    const auto& f = chain.front();
    const auto& b = chain.back();
    c.closed = chain.size() >= 4 && std::abs(f.x - b.x) <= 1 && std::abs(f.y - b.y) <= 1;
    if (arc_length(c) + 1e-9 < params.min_contour_length) continue;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Contour& a, const Contour& b) {
    return a.mean_strength > b.mean_strength;
  });
  return out;
}

double blob_response(const Image& img, int x, int y) {
  if (x < 2 || y < 2 || x + 2 >= img.width() || y + 2 >= img.height()) return 0.0;
  int inner = 0, ring = 0;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const int v = img.at(x + dx, y + dy);
      if (std::abs(dx) <= 1 && std::abs(dy) <= 1) inner += v; else ring += v;
    }
  }
  return std::fabs(inner / 9.0 - ring / 16.0);
}

std::vector<PointFeature> extract_points(const Image& img, const std::vector<Contour>& contours,
                                         const PointParams& params) {
  std::vector<PointFeature> out;
  for (const auto& c : contours) {
    if (c.closed || c.points.size() < 2) continue;
    out.push_back({c.points.front(), PointKind::kContourEndpoint, c.mean_strength});
    out.push_back({c.points.back(), PointKind::kContourEndpoint, c.mean_strength});
  }

  // Junctions: chain pixels whose chain neighbours form >= 3 separate groups
  // around the 8-ring (a staircase pixel has three neighbours but only two
  // groups).
  const int w = img.width(), h = img.height();
  std::vector<double> chain_strength(static_cast<std::size_t>(w) * h, -1.0);
  for (const auto& c : contours)
    for (const auto& p : c.points)
      chain_strength[static_cast<std::size_t>(p.y) * w + static_cast<std::size_t>(p.x)] =
          c.mean_strength;
  auto on_chain = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h &&
           chain_strength[static_cast<std::size_t>(y) * w + x] >= 0.0;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!on_chain(x, y)) continue;
      int groups = 0;
      for (std::size_t k = 0; k < kRing.size(); ++k) {
        const auto& d = kRing[k];
        const auto& prev = kRing[(k + kRing.size() - 1) % kRing.size()];
        if (on_chain(x + d.x, y + d.y) && !on_chain(x + prev.x, y + prev.y)) ++groups;
      }
      if (groups >= 3) {
        out.push_back({{static_cast<double>(x), static_cast<double>(y)}, PointKind::kJunction,
                       chain_strength[static_cast<std::size_t>(y) * w + x]});
      }
    }
  }

  std::vector<double> resp(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) resp[static_cast<std::size_t>(y) * w + x] = blob_response(img, x, y);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = resp[static_cast<std::size_t>(y) * w + x];
      if (r < params.blob_threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const double rn = resp[static_cast<std::size_t>(ny) * w + nx];
          // Earlier raster neighbours must be strictly weaker.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (rn > r || (earlier && rn == r)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        out.push_back({{static_cast<double>(x), static_cast<double>(y)}, PointKind::kGradientPeak, r});
      }
    }
  }
  return out;
}

bool mask_contains(const std::vector<Pixel>& sorted_mask, Pixel p) {
  return std::binary_search(sorted_mask.begin(), sorted_mask.end(), p);
}

std::vector<Pixel> boundary_pixels(const std::vector<Pixel>& sorted_mask) {
  std::vector<Pixel> out;
  if (sorted_mask.empty()) return out;
  int x0 = sorted_mask.front().x, x1 = x0;
  for (const auto& p : sorted_mask) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
  }
  const int y0 = sorted_mask.front().y;
  const int y1 = sorted_mask.back().y;
  // Bitmap with a one-pixel frame so neighbour lookups need no bounds test.
  const int w = x1 - x0 + 3;
  std::vector<bool> in(static_cast<std::size_t>(w) * (y1 - y0 + 3), false);
  auto at = [&](int x, int y) { return static_cast<std::size_t>(y - y0 + 1) * w + (x - x0 + 1); };
  for (const auto& p : sorted_mask) in[at(p.x, p.y)] = true;
  for (const auto& p : sorted_mask) {
    if (!in[at(p.x + 1, p.y)] || !in[at(p.x - 1, p.y)] || !in[at(p.x, p.y + 1)] ||
        !in[at(p.x, p.y - 1)]) {
      out.push_back(p);
    }
  }
  return out;
}

Region make_region(std::vector<Pixel> mask, const Image* img) {
  std::sort(mask.begin(), mask.end());
  mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
  Region r;
  r.area = static_cast<int>(mask.size());
  double sx = 0.0, sy = 0.0, si = 0.0;
  for (const auto& p : mask) {
    sx += p.x;
    sy += p.y;
    if (img) si += img->at(p.x, p.y);
  }
  if (r.area > 0) {
    r.centroid = {sx / r.area, sy / r.area};
    r.mean_intensity = si / r.area;
  }
  r.mask = std::move(mask);
  return r;
}

std::vector<Region> extract_regions(const Image& img, const RegionParams& params) {
  if (params.num_levels < 2) {
    throw Error(ErrorCode::kInvalidArgument, "num_levels must be >= 2");
  }
  const int w = img.width(), h = img.height();
  std::vector<int> level(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      level[static_cast<std::size_t>(y) * w + x] = img.at(x, y) * params.num_levels / 256;

  std::vector<bool> seen(level.size(), false);
  std::vector<Region> out;
  std::vector<Pixel> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::size_t>(y) * w + x;
      if (seen[idx]) continue;
      const int lv = level[idx];
      std::vector<Pixel> mask;
      stack.assign(1, {x, y});
      seen[idx] = true;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        mask.push_back(p);
        constexpr std::array<Pixel, 4> kFour = {Pixel{1, 0}, Pixel{-1, 0}, Pixel{0, 1}, Pixel{0, -1}};
        for (auto d : kFour) {
          const int nx = p.x + d.x, ny = p.y + d.y;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto n = static_cast<std::size_t>(ny) * w + nx;
          if (seen[n] || level[n] != lv) continue;
          seen[n] = true;
          stack.push_back({nx, ny});
        }
      }
      if (static_cast<int>(mask.size()) < params.min_region_area) continue;
      out.push_back(make_region(std::move(mask), &img));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Region& a, const Region& b) { return a.area > b.area; });
  return out;
}

PrimitiveSet extract_primitives(const Image& img, const ExtractionParams& params) {
  PrimitiveSet set;
  set.width = img.width();
  set.height = img.height();
  set.contours = extract_contours(img, params.contour);
  set.points = extract_points(img, set.contours, params.point);
  set.regions = extract_regions(img, params.region);
  return set;
}

std::vector<Vec2> point_set(const Primitive& p) {
  return std::visit(
      [](const auto& v) -> std::vector<Vec2> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointFeature>) {
          return {v.position};
        } else if constexpr (std::is_same_v<T, Contour>) {
          return v.points;
        } else {
          std::vector<Vec2> out;
          out.reserve(v.mask.size());
          for (const auto& px : v.mask) out.push_back({static_cast<double>(px.x), static_cast<double>(px.y)});
          return out;
        }
      },
      p);
}

Vec2 centroid(const Primitive& p) {
  return std::visit(
      [](const auto& v) -> Vec2 {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointFeature>) {
          return v.position;
        } else if constexpr (std::is_same_v<T, Contour>) {
          Vec2 s;
          for (const auto& q : v.points) {
            s.x += q.x;
            s.y += q.y;
          }
          const double n = static_cast<double>(std::max<std::size_t>(1, v.points.size()));
          return {s.x / n, s.y / n};
        } else {
          return v.centroid;
        }
      },
      p);
}

Primitive translated(const Primitive& p, double dx, double dy) {
  return std::visit(
      [&](const auto& v) -> Primitive {
        using T = std::decay_t<decltype(v)>;
        T out = v;
        if constexpr (std::is_same_v<T, PointFeature>) {
          out.position = {v.position.x + dx, v.position.y + dy};
        } else if constexpr (std::is_same_v<T, Contour>) {
          for (auto& q : out.points) {
            q.x += dx;
            q.y += dy;
          }
        } else {
          const int ix = static_cast<int>(std::lround(dx));
          const int iy = static_cast<int>(std::lround(dy));
          for (auto& q : out.mask) {
            q.x += ix;
            q.y += iy;
          }
          out.centroid = {v.centroid.x + ix, v.centroid.y + iy};
        }
        return out;
      },
      p);
}

}  // namespace mirc
