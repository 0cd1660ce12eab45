#pragma once

// Hand-rolled generators for property tests. They use std::mt19937
// directly so the library RNG is not under test here.

#include <random>
#include <vector>

#include "mirc/image.hpp"
#include "mirc/primitives.hpp"

namespace testsupport {

inline int uniform_int(std::mt19937& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline double uniform(std::mt19937& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline mirc::Image random_image(std::mt19937& g, int w, int h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (auto& p : px) p = static_cast<std::uint8_t>(uniform_int(g, 0, 255));
  return mirc::Image(w, h, std::move(px));
}

/// Random blocky image: a few filled rectangles on a background, so edges
/// and regions exist.
inline mirc::Image random_shapes(std::mt19937& g, int w, int h) {
  mirc::Image img(w, h, static_cast<std::uint8_t>(uniform_int(g, 0, 255)));
  const int n = uniform_int(g, 1, 4);
  for (int k = 0; k < n; ++k) {
    const int x0 = uniform_int(g, 0, w - 2), y0 = uniform_int(g, 0, h - 2);
    const int x1 = uniform_int(g, x0 + 1, w - 1), y1 = uniform_int(g, y0 + 1, h - 1);
    const auto v = static_cast<std::uint8_t>(uniform_int(g, 0, 255));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) img.at(x, y) = v;
  }
  return img;
}

inline mirc::Region random_region(std::mt19937& g, int w, int h) {
  const int x0 = uniform_int(g, 0, w - 3), y0 = uniform_int(g, 0, h - 3);
  const int x1 = uniform_int(g, x0, std::min(w - 1, x0 + 8));
  const int y1 = uniform_int(g, y0, std::min(h - 1, y0 + 8));
  std::vector<mirc::Pixel> mask;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) mask.push_back({x, y});
  return mirc::make_region(std::move(mask));
}

inline mirc::Contour random_contour(std::mt19937& g, int w, int h) {
  mirc::Contour c;
  const int n = uniform_int(g, 2, 6);
  for (int i = 0; i < n; ++i) c.points.push_back({uniform(g, 0, w - 1), uniform(g, 0, h - 1)});
  c.mean_strength = uniform(g, 0, 100);
  return c;
}

inline mirc::PointFeature random_point(std::mt19937& g, int w, int h) {
  mirc::PointFeature p;
  p.position = {uniform(g, 0, w - 1), uniform(g, 0, h - 1)};
  p.strength = uniform(g, 0, 60);
  return p;
}

inline mirc::Primitive random_primitive(std::mt19937& g, int w, int h) {
  switch (uniform_int(g, 0, 2)) {
    case 0: return random_point(g, w, h);
    case 1: return random_contour(g, w, h);
    default: return random_region(g, w, h);
  }
}

}  // namespace testsupport
