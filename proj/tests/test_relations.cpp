#include <cmath>
#include <limits>

#include "doctest.h"
#include "mirc/relations.hpp"
#include "support.hpp"

using namespace mirc;

namespace {

// Brute-force minimum distance over the full point sets.
double brute_distance(const Primitive& a, const Primitive& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : point_set(a))
    for (const auto& q : point_set(b)) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
  return best;
}

Primitive at(double x, double y) { return PointFeature{{x, y}, PointKind::kGradientPeak, 10.0}; }

Primitive block(int x0, int y0, int w, int h) {
  std::vector<Pixel> mask;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) mask.push_back({x, y});
  return make_region(std::move(mask));
}

}  // namespace

TEST_CASE("touch: closed form exp(-d/tol)") {
  CHECK(rel_touch(at(0, 0), at(0, 0), 2.0) == doctest::Approx(1.0));
  CHECK(rel_touch(at(0, 0), at(3, 4), 2.0) == doctest::Approx(std::exp(-2.5)));
  CHECK(rel_touch(block(0, 0, 3, 3), block(5, 0, 3, 3), 2.0) == doctest::Approx(std::exp(-1.5)));
  CHECK(rel_touch(block(0, 0, 3, 3), block(3, 0, 3, 3), 1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("property: touch is symmetric and matches the brute-force distance") {
  std::mt19937 g(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testsupport::random_primitive(g, 24, 24);
    const auto b = testsupport::random_primitive(g, 24, 24);
    const double tol = testsupport::uniform(g, 0.5, 4.0);
    const double ab = rel_touch(a, b, tol), ba = rel_touch(b, a, tol);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab == doctest::Approx(std::exp(-brute_distance(a, b) / tol)));
    CHECK(ab > 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("relative position: compass directions land in single bins") {
  const auto east = rel_relative_position(at(0, 0), at(5, 0));
  CHECK(east[0] == doctest::Approx(1.0));
  // Image y grows downward, so a smaller y is North (bin 2).
  const auto north = rel_relative_position(at(0, 0), at(0, -5));
  CHECK(north[2] == doctest::Approx(1.0));
  const auto south = rel_relative_position(at(0, 0), at(0, 5));
  CHECK(south[6] == doctest::Approx(1.0));
  const auto half = rel_relative_position(at(0, 0), at(5, -5 * std::tan(std::numbers::pi / 8)));
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));
}

TEST_CASE("relative position: coincident centroids are uniform") {
  const auto v = rel_relative_position(block(0, 0, 4, 4), block(1, 1, 2, 2));
  for (double x : v) CHECK(x == doctest::Approx(1.0 / 8));
}

TEST_CASE("property: relative position is a distribution, reverses by four bins, and is translation invariant") {
  std::mt19937 g(22);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testsupport::random_primitive(g, 24, 24);
    const auto b = testsupport::random_primitive(g, 24, 24);
    const auto v = rel_relative_position(a, b);
    double sum = 0.0;
    int nonzero = 0;
    for (double x : v) {
      CHECK(x >= 0.0);
      sum += x;
      nonzero += x > 1e-12;
    }
    CHECK(sum == doctest::Approx(1.0));
    const auto r = rel_relative_position(b, a);
    CHECK(nonzero >= 1);
    for (int k = 0; k < 8; ++k) CHECK(r[(k + 4) % 8] == doctest::Approx(v[k]));
    const int dx = testsupport::uniform_int(g, -5, 5), dy = testsupport::uniform_int(g, -5, 5);
    const auto t = rel_relative_position(translated(a, dx, dy), translated(b, dx, dy));
    for (int k = 0; k < 8; ++k) CHECK(t[k] == doctest::Approx(v[k]).epsilon(1e-9));
  }
}

TEST_CASE("property: relations are translation invariant") {
  std::mt19937 g(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = testsupport::random_primitive(g, 24, 24);
    const auto b = testsupport::random_primitive(g, 24, 24);
    const int dx = testsupport::uniform_int(g, -6, 6), dy = testsupport::uniform_int(g, -6, 6);
    CHECK(rel_touch(a, b, 2.0) == doctest::Approx(rel_touch(translated(a, dx, dy), translated(b, dx, dy), 2.0)));
  }
}

TEST_CASE("continuity: collinear abutting segments score one, perpendicular ones zero") {
  Contour left{{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}, 10.0, false};
  Contour right{{{4, 0}, {5, 0}, {6, 0}, {7, 0}, {8, 0}}, 10.0, false};
  Contour down{{{4, 0}, {4, 1}, {4, 2}, {4, 3}, {4, 4}}, 10.0, false};
  CHECK(rel_continuity(left, right, 2.0) == doctest::Approx(1.0));
  CHECK(rel_continuity(left, down, 2.0) == doctest::Approx(0.0));
  Contour far{{{10, 0}, {11, 0}, {12, 0}, {13, 0}}, 10.0, false};
  CHECK(rel_continuity(left, far, 2.0) == doctest::Approx(std::exp(-3.0)));
}

TEST_CASE("bounds: a contour along a region edge scores one, a distant one zero") {
  const auto r = std::get<Region>(block(2, 2, 6, 6));
  Contour edge{{{2, 1.5}, {4, 1.5}, {6, 1.5}}, 10.0, false};
  Contour far{{{20, 20}, {22, 20}}, 10.0, false};
  CHECK(rel_contour_bounds_region(edge, r) == doctest::Approx(1.0));
  CHECK(rel_contour_bounds_region(far, r) == doctest::Approx(0.0));
}

TEST_CASE("exists: absent operand is zero, strengths saturate") {
  RelationParams params;
  CHECK(rel_exists(nullptr, params, {30, 30}) == 0.0);
  const Primitive weak = PointFeature{{1, 1}, PointKind::kGradientPeak, 25.0};
  const Primitive strong = PointFeature{{1, 1}, PointKind::kGradientPeak, 500.0};
  CHECK(rel_exists(&weak, params, {30, 30}) == doctest::Approx(0.5));
  CHECK(rel_exists(&strong, params, {30, 30}) == doctest::Approx(1.0));
}

TEST_CASE("shape descriptor of a full-frame block") {
  const auto r = std::get<Region>(block(0, 0, 10, 10));
  const auto d = shape_descriptor(r, {10, 10});
  CHECK(d[0] == doctest::Approx(1.0));
}

TEST_CASE("missing operands give the zero vector") {
  for (auto kind : {RelationKind::kTouch, RelationKind::kRelPos, RelationKind::kExists}) {
    const auto v = evaluate_relation(kind, {}, nullptr, nullptr, {30, 30});
    CHECK(v.size() == relation_dims(kind));
    for (double x : v) CHECK(x == 0.0);
  }
}
