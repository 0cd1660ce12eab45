#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mirc/image.hpp"
#include "mirc/model.hpp"

namespace mirc {

enum class Label { kNegative, kPositive };

/// Generation parameters of one glyph, recorded for provenance.
struct GlyphPlacement {
  double torso1_cx = 0, torso1_cy = 0, torso1_rx = 0, torso1_ry = 0;
  double torso2_cx = 0, torso2_cy = 0, torso2_rx = 0, torso2_ry = 0;
  int arm_x0 = 0, arm_y0 = 0, arm_x1 = 0, arm_y1 = 0;
  int arm_thickness = 3;
  int palm_x = 0, palm_y = 0, palm_size = 0;
  int palm_gap = 0;  // min distance palm -> torso-2
  int background = 0, torso1_level = 0, torso2_level = 0, rim_level = 0, arm_level = 0,
      palm_level = 0;
  double noise_sigma = 4.0;
};

/// Synthetic interaction glyph: a hug iff the palm touches torso-2.
struct GlyphSample {
  Image image;
  Assignment gold;  // gold geometry per component of the hug model
  Label label = Label::kPositive;
  std::uint32_t seed = 0;
  GlyphPlacement placement;
};

struct GlyphLevels {
  int background = 224;
  int torso1 = 160;
  int torso2 = 100;
  int rim = 80;
  int arm = 32;
  int palm = 160;
};

struct GlyphOptions {
  /// Torsos run past the bottom edge and the arm sits 4 rows above it, so a
  /// top-left crop removes the palm (recognition-drop experiments).
  bool low = false;
};

GlyphSample generate(std::uint32_t seed, Label label, int width = 30, int height = 30,
                     const GlyphOptions& options = {});

/// Minimum Euclidean distance between two pixel masks (brute force).
double mask_distance(const std::vector<Pixel>& a, const std::vector<Pixel>& b);

struct PlantedGlyph {
  Box box;
  GlyphSample glyph;  // window-local geometry
};

struct Scene {
  Image image;
  std::vector<PlantedGlyph> planted;
  int background = 240;
};

/// Composites n positive glyphs at non-overlapping boxes.
Scene generate_scene(std::uint32_t seed, int n_glyphs, int width = 120, int height = 120,
                     int glyph_size = 30);

/// Gold assignment translated from a planted box to full-image coordinates.
Assignment to_scene_coordinates(const Assignment& local, const Box& box);

std::string placement_to_json(const GlyphPlacement& p);

}  // namespace mirc
