#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "mirc/error.hpp"
#include "mirc/primitives.hpp"
#include "support.hpp"

using namespace mirc;

namespace {

Image transpose(const Image& img) {
  Image out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(y, x) = img.at(x, y);
  return out;
}

Image filled_square(int size, int x0, int y0, int side, std::uint8_t bg, std::uint8_t fg) {
  Image img(size, size, bg);
  for (int y = y0; y < y0 + side; ++y)
    for (int x = x0; x < x0 + side; ++x) img.at(x, y) = fg;
  return img;
}

}  // namespace

TEST_CASE("gradient: central differences on a ramp") {
  Image img(5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y) = static_cast<std::uint8_t>(10 * x);
  const auto g = gradient_map(img);
  CHECK(g.mag(2, 2) == doctest::Approx(10.0));
  CHECK(g.ori(2, 2) == doctest::Approx(0.0));
  CHECK_FALSE(g.reversed[2 * 5 + 2]);
  CHECK(g.mag(0, 2) == 0.0);
  CHECK(g.mag(2, 4) == 0.0);
}

TEST_CASE("gradient: a falling ramp is flagged reversed") {
  Image img(5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y) = static_cast<std::uint8_t>(200 - 10 * x);
  const auto g = gradient_map(img);
  CHECK(g.mag(2, 2) == doctest::Approx(10.0));
  CHECK(g.ori(2, 2) == doctest::Approx(0.0));
  CHECK(g.reversed[2 * 5 + 2]);
}

TEST_CASE("gradient: images smaller than 3x3 are rejected") {
  CHECK_THROWS_AS(gradient_map(Image(2, 5)), Error);
}

TEST_CASE("property: gradient magnitude is transpose symmetric") {
  std::mt19937 g(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto img = testsupport::random_image(g, testsupport::uniform_int(g, 3, 15),
                                               testsupport::uniform_int(g, 3, 15));
    const auto a = gradient_map(img), b = gradient_map(transpose(img));
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        CHECK(a.mag(x, y) == doctest::Approx(b.mag(y, x)));
        // Orientation transposes as pi/2 - theta, folded into [0, pi).
        if (a.mag(x, y) > 0.0) {
          double expect = std::numbers::pi / 2 - a.ori(x, y);
          if (expect < 0) expect += std::numbers::pi;
          const double diff = std::abs(b.ori(y, x) - expect);
          CHECK(std::min(diff, std::numbers::pi - diff) < 1e-9);
        }
      }
  }
}

TEST_CASE("contours: a vertical step gives one long contour") {
  Image img(20, 20, 40);
  for (int y = 0; y < 20; ++y)
    for (int x = 10; x < 20; ++x) img.at(x, y) = 200;
  const auto cs = extract_contours(img);
  REQUIRE(cs.size() == 1);
  double lo = 1e9, hi = -1e9;
  for (const auto& p : cs[0].points) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
    CHECK(std::abs(p.x - 9.5) <= 1.0);
  }
  CHECK(hi - lo + 1 >= 16);
  CHECK_FALSE(cs[0].closed);
}

TEST_CASE("contours: a filled 8x8 square gives one closed outline") {
  const auto cs = extract_contours(filled_square(20, 6, 6, 8, 30, 220));
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].closed);
  CHECK(std::abs(arc_length(cs[0]) - 28.0) <= 4.0);
}

TEST_CASE("contours: a constant image has none") {
  CHECK(extract_contours(Image(16, 16, 128)).empty());
}

TEST_CASE("points: an open contour contributes its endpoints") {
  Image img(20, 20, 40);
  for (int y = 0; y < 20; ++y)
    for (int x = 10; x < 20; ++x) img.at(x, y) = 200;
  const auto cs = extract_contours(img);
  const auto pts = extract_points(img, cs);
  const auto n = std::count_if(pts.begin(), pts.end(),
                               [](const PointFeature& p) { return p.kind == PointKind::kContourEndpoint; });
  CHECK(n == 2);
}

TEST_CASE("points: an isolated dot is a gradient peak") {
  Image img(15, 15, 50);
  img.at(7, 7) = 250;
  const auto set = extract_primitives(img);
  const auto it = std::find_if(set.points.begin(), set.points.end(),
                               [](const PointFeature& p) { return p.kind == PointKind::kGradientPeak; });
  REQUIRE(it != set.points.end());
  CHECK(std::abs(it->position.x - 7) <= 1.0);
  CHECK(std::abs(it->position.y - 7) <= 1.0);
}

TEST_CASE("regions: constant image is one region covering everything") {
  const auto rs = extract_regions(Image(10, 8, 90));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].area == 80);
  CHECK(rs[0].centroid.x == doctest::Approx(4.5));
  CHECK(rs[0].centroid.y == doctest::Approx(3.5));
  CHECK(rs[0].mean_intensity == doctest::Approx(90.0));
}

TEST_CASE("regions: half dark, half bright gives two halves") {
  Image img(10, 10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 5; x < 10; ++x) img.at(x, y) = 240;
  const auto rs = extract_regions(img);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].area == 50);
  CHECK(rs[1].area == 50);
}

TEST_CASE("regions: two separated blobs of one level stay separate") {
  Image img(20, 10, 10);
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 6; ++x) img.at(x, y) = 240, img.at(x + 10, y) = 240;
  const auto rs = extract_regions(img);
  REQUIRE(rs.size() == 3);
  CHECK(rs[1].area == 16);
  CHECK(rs[2].area == 16);
}

TEST_CASE("property: regions are disjoint and tile the image when nothing is dropped") {
  std::mt19937 g(12);
  RegionParams params;
  params.min_region_area = 1;
  for (int trial = 0; trial < 30; ++trial) {
    const int w = testsupport::uniform_int(g, 4, 20), h = testsupport::uniform_int(g, 4, 20);
    const auto img = testsupport::random_shapes(g, w, h);
    const auto rs = extract_regions(img, params);
    std::set<Pixel> seen;
    std::size_t total = 0;
    for (const auto& r : rs) {
      CHECK(std::is_sorted(r.mask.begin(), r.mask.end()));
      CHECK(r.area == static_cast<int>(r.mask.size()));
      total += r.mask.size();
      seen.insert(r.mask.begin(), r.mask.end());
    }
    CHECK(total == seen.size());
    CHECK(seen.size() == static_cast<std::size_t>(w) * h);
  }
}

TEST_CASE("property: extraction is deterministic") {
  std::mt19937 g(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = testsupport::random_shapes(g, 24, 24);
    CHECK(extract_primitives(img) == extract_primitives(img));
  }
}

TEST_CASE("translated moves every sample") {
  std::mt19937 g(14);
  const Primitive c = testsupport::random_contour(g, 20, 20);
  const auto moved = translated(c, 3, -2);
  const auto a = point_set(c), b = point_set(moved);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].x == doctest::Approx(a[i].x + 3));
    CHECK(b[i].y == doctest::Approx(a[i].y - 2));
  }
}
