#include "mirc/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "mirc/error.hpp"
#include "mirc/rng.hpp"

namespace mirc {

namespace {

enum Part : std::uint8_t { kBg = 0, kTorso1, kTorso2, kRim, kArm, kPalm };

struct LabelMap {
  int w, h;
  std::vector<std::uint8_t> label;
  LabelMap(int width, int height)
      : w(width), h(height), label(static_cast<std::size_t>(width) * height, kBg) {}
  std::uint8_t& at(int x, int y) { return label[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t at(int x, int y) const { return label[static_cast<std::size_t>(y) * w + x]; }
  bool in(int x, int y) const { return x >= 0 && y >= 0 && x < w && y < h; }

  std::vector<Pixel> pixels_of(std::initializer_list<Part> parts) const {
    std::vector<Pixel> out;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (std::find(parts.begin(), parts.end(), static_cast<Part>(at(x, y))) != parts.end())
          out.push_back({x, y});
    return out;
  }
};

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

void paint_ellipse(LabelMap& m, double cx, double cy, double rx, double ry, Part part) {
  for (int y = 0; y < m.h; ++y) {
    for (int x = 0; x < m.w; ++x) {
      const double u = (x - cx) / rx, v = (y - cy) / ry;
      if (u * u + v * v <= 1.0) m.at(x, y) = part;
    }
  }
}

// Leftmost / rightmost column of the given parts in a row, or -1.
int row_extreme(const LabelMap& m, int y, std::initializer_list<Part> parts, bool leftmost) {
  int found = -1;
  for (int x = 0; x < m.w; ++x) {
    if (std::find(parts.begin(), parts.end(), static_cast<Part>(m.at(x, y))) == parts.end()) continue;
    if (leftmost) return x;
    found = x;
  }
  return found;
}

Contour polyline(std::vector<Vec2> pts) {
  Contour c;
  c.points = std::move(pts);
  return c;
}

}  // namespace

double mask_distance(const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a)
    for (const auto& q : b) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
  return best;
}

GlyphSample generate(std::uint32_t seed, Label label, int width, int height,
                     const GlyphOptions& options) {
  if (width < 24 || height < 24) {
    throw Error(ErrorCode::kImageTooSmall, "glyph dimensions must be at least 24x24");
  }
  const GlyphLevels levels;
  const double sx = width / 30.0;
  const double sy = height / 30.0;
  Rng rng(seed);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    GlyphPlacement pl;
    pl.background = levels.background;
    pl.torso1_level = levels.torso1;
    pl.torso2_level = levels.torso2;
    pl.rim_level = levels.rim;
    pl.arm_level = levels.arm;
    pl.palm_level = levels.palm;

    pl.torso1_rx = rng.uniform(2.5, 3.5) * sx;
    pl.torso1_ry = (options.low ? rng.uniform(16.0, 20.0) : rng.uniform(6.5, 9.0)) * sy;
    pl.torso1_cx = pl.torso1_rx + 1.5 + rng.uniform(0.0, 1.5) * sx;
    pl.torso1_cy = options.low ? height - 1 + rng.uniform(0.0, 2.0)
                               : rng.uniform(pl.torso1_ry + 1.5, height - pl.torso1_ry - 2.5);
    pl.torso2_rx = rng.uniform(2.5, 3.5) * sx;
    pl.torso2_ry = (options.low ? rng.uniform(16.0, 20.0) : rng.uniform(6.5, 9.0)) * sy;
    pl.torso2_cx = width - pl.torso2_rx - 2.5 - rng.uniform(0.0, 1.5) * sx;
    pl.torso2_cy = options.low ? height - 1 + rng.uniform(0.0, 2.0)
                               : std::clamp(pl.torso1_cy + rng.uniform(-4.0, 4.0) * sy,
                                            pl.torso2_ry + 1.5, height - pl.torso2_ry - 2.5);
    pl.palm_size = rng.uniform_int(4, 5);

    LabelMap m(width, height);
    paint_ellipse(m, pl.torso1_cx, pl.torso1_cy, pl.torso1_rx, pl.torso1_ry, kTorso1);
    paint_ellipse(m, pl.torso2_cx, pl.torso2_cy, pl.torso2_rx, pl.torso2_ry, kTorso2);
    // Back: darker rim on torso-2's far side.
    for (int y = 0; y < height; ++y) {
      const int right = row_extreme(m, y, {kTorso2}, false);
      if (right < 0) continue;
      for (int x = std::max(0, right - 1); x <= right; ++x)
        if (m.at(x, y) == kTorso2) m.at(x, y) = kRim;
    }

    int t1_top = height, t1_bot = -1, t2_top = height, t2_bot = -1;
    for (int y = 0; y < height; ++y) {
      if (row_extreme(m, y, {kTorso1}, true) >= 0) {
        t1_top = std::min(t1_top, y);
        t1_bot = std::max(t1_bot, y);
      }
      if (row_extreme(m, y, {kTorso2, kRim}, true) >= 0) {
        t2_top = std::min(t2_top, y);
        t2_bot = std::max(t2_bot, y);
      }
    }
    if (t1_bot - t1_top < 6 || t2_bot - t2_top < 6) continue;

    // The arm runs level: straight stroke edges keep its two contours
    // whole under edge linking.
    const int arm_lo = std::max(t1_top, t2_top) + 4;
    const int arm_hi = std::min(t1_bot, t2_bot) - 4;
    if (arm_lo > (options.low ? height - 4 : arm_hi)) continue;
    const int shoulder_y = options.low ? height - 4 : rng.uniform_int(arm_lo, arm_hi);
    const int hand_y = shoulder_y;
    const int s = pl.palm_size;
    const int palm_y = hand_y - s / 2;
    if (palm_y < 1 || palm_y + s > height - (options.low ? 0 : 1)) continue;
    int min_left = width;
    for (int y = palm_y; y < palm_y + s; ++y) {
      const int left = row_extreme(m, y, {kTorso2, kRim}, true);
      if (left >= 0) min_left = std::min(min_left, left);
    }
    if (min_left >= width) continue;
    pl.palm_gap = label == Label::kPositive ? 1 : 4 + rng.uniform_int(0, 2);
    const int palm_right = min_left - pl.palm_gap;
    const int palm_x = palm_right - s + 1;
    const int shoulder_x = row_extreme(m, shoulder_y, {kTorso1}, false);
    if (shoulder_x < 0 || palm_x - shoulder_x < 4) continue;
    if (std::abs(hand_y - shoulder_y) > 0.8 * (palm_x - shoulder_x)) continue;

    pl.arm_x0 = shoulder_x;
    pl.arm_y0 = shoulder_y;
    pl.arm_x1 = palm_x;
    pl.arm_y1 = hand_y;
    pl.palm_x = palm_x;
    pl.palm_y = palm_y;

    // Palm must not reach torso-1.
    bool clash = false;
    for (int y = palm_y; y < palm_y + s && !clash; ++y)
      for (int x = palm_x - 1; x < palm_x + s && !clash; ++x)
        if (m.in(x, y) && m.at(x, y) == kTorso1) clash = true;
    if (clash) continue;

    const double half = (pl.arm_thickness - 1) / 2.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (m.at(x, y) != kBg && m.at(x, y) != kTorso1) continue;
        if (x < shoulder_x - 1 || x > palm_x) continue;
        if (segment_distance(x, y, shoulder_x, shoulder_y, palm_x, hand_y) <= half + 0.01) {
          m.at(x, y) = kArm;
        }
      }
    }
    for (int y = palm_y; y < palm_y + s; ++y)
      for (int x = palm_x; x < palm_x + s; ++x) m.at(x, y) = kPalm;

    auto palm_px = m.pixels_of({kPalm});
    auto torso2_px = m.pixels_of({kTorso2, kRim});
    auto torso1_px = m.pixels_of({kTorso1});
    const double gap = mask_distance(palm_px, torso2_px);
    if (label == Label::kPositive ? gap > 1.0 : gap < 4.0) continue;
    if (mask_distance(palm_px, torso1_px) < 3.0) continue;

    GlyphSample out;
    out.seed = seed;
    out.label = label;
    out.placement = pl;

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        int level = levels.background;
        switch (m.at(x, y)) {
          case kTorso1: level = levels.torso1; break;
          case kTorso2: level = levels.torso2; break;
          case kRim: level = levels.rim; break;
          case kArm: level = levels.arm; break;
          case kPalm: level = levels.palm; break;
          default: break;
        }
        const double v = std::round(level + rng.normal(0.0, pl.noise_sigma));
        pixels[static_cast<std::size_t>(y) * width + x] =
            static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
    out.image = Image(width, height, std::move(pixels));

    out.gold["torso-region-1"] = make_region(torso1_px, &out.image);
    out.gold["torso-region-2"] = make_region(torso2_px, &out.image);
    out.gold["palm-region"] = make_region(palm_px, &out.image);
    out.gold["face-region-1"] = std::nullopt;
    out.gold["face-region-2"] = std::nullopt;

    // Back contour: the outer side of the rim, one point per row.
    std::vector<Vec2> back;
    for (int y = t2_top + 1; y <= t2_bot - 1; ++y) {
      const int right = row_extreme(m, y, {kRim}, false);
      if (right >= 0) back.push_back({static_cast<double>(right + 1), static_cast<double>(y)});
    }
    out.gold["back-contour"] = polyline(std::move(back));

    // Arm contours: the background rows just above and below the stroke,
    // where edge thinning puts dark-on-light boundaries.
    std::vector<Vec2> upper, lower;
    for (int x = shoulder_x + 1; x < palm_x; ++x) {
      int top = -1, bot = -1;
      for (int y = 0; y < height; ++y) {
        if (m.at(x, y) != kArm) continue;
        if (top < 0) top = y;
        bot = y;
      }
      if (top < 0) continue;
      upper.push_back({static_cast<double>(x), static_cast<double>(top - 1)});
      lower.push_back({static_cast<double>(x), static_cast<double>(bot + 1)});
    }
    if (upper.size() < 2) continue;
    out.gold["arm-contour-1"] = polyline(std::move(upper));
    out.gold["arm-contour-2"] = polyline(std::move(lower));
    return out;
  }
  throw Error(ErrorCode::kPlacementFailed, "could not place glyph parts");
}

Assignment to_scene_coordinates(const Assignment& local, const Box& box) {
  Assignment out;
  for (const auto& [name, prim] : local) {
    out[name] = prim ? std::optional<Primitive>(translated(*prim, box.x, box.y)) : std::nullopt;
  }
  return out;
}

Scene generate_scene(std::uint32_t seed, int n_glyphs, int width, int height, int glyph_size) {
  if (n_glyphs < 0) throw Error(ErrorCode::kInvalidArgument, "n_glyphs must be >= 0");
  Scene scene;
  Rng rng(seed);
  std::vector<Box> boxes;
  for (int g = 0; g < n_glyphs; ++g) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      Box b{rng.uniform_int(1, width - glyph_size - 1), rng.uniform_int(1, height - glyph_size - 1),
            glyph_size, glyph_size};
      // Disjoint with a 2 px margin so glyph edges never interact.
      Box grown{b.x - 2, b.y - 2, b.w + 4, b.h + 4};
      if (std::all_of(boxes.begin(), boxes.end(),
                      [&](const Box& o) { return box_iou(grown, o) == 0.0; })) {
        boxes.push_back(b);
        placed = true;
      }
    }
    if (!placed) throw Error(ErrorCode::kPlacementFailed, "cannot place glyph in scene");
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  for (auto& p : pixels) {
    p = static_cast<std::uint8_t>(std::clamp(std::round(scene.background + rng.normal(0.0, 4.0)), 0.0, 255.0));
  }
  for (const auto& b : boxes) {
    const auto glyph_seed = rng.next_u32();
    auto glyph = generate(glyph_seed, Label::kPositive, b.w, b.h);
    for (int y = 0; y < b.h; ++y)
      for (int x = 0; x < b.w; ++x)
        pixels[static_cast<std::size_t>(b.y + y) * width + (b.x + x)] = glyph.image.at(x, y);
    scene.planted.push_back({b, std::move(glyph)});
  }
  scene.image = Image(width, height, std::move(pixels));
  return scene;
}

std::string placement_to_json(const GlyphPlacement& p) {
  nlohmann::json j = {
      {"torso1", {p.torso1_cx, p.torso1_cy, p.torso1_rx, p.torso1_ry}},
      {"torso2", {p.torso2_cx, p.torso2_cy, p.torso2_rx, p.torso2_ry}},
      {"arm", {p.arm_x0, p.arm_y0, p.arm_x1, p.arm_y1, p.arm_thickness}},
      {"palm", {p.palm_x, p.palm_y, p.palm_size}},
      {"palm_gap", p.palm_gap},
      {"levels", {p.background, p.torso1_level, p.torso2_level, p.rim_level, p.arm_level, p.palm_level}},
      {"noise_sigma", p.noise_sigma},
  };
  return j.dump();
}

}  // namespace mirc
