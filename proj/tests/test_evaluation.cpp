#include "doctest.h"
#include "mirc/error.hpp"
#include "mirc/evaluation.hpp"
#include "support.hpp"

using namespace mirc;

namespace {

Primitive block(int x0, int y0, int w, int h) {
  std::vector<Pixel> mask;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) mask.push_back({x, y});
  return make_region(std::move(mask));
}

}  // namespace

TEST_CASE("jaccard: identical, disjoint and one-third overlaps") {
  const ImageDims dims{20, 20};
  const Assignment gold{{"r", block(0, 0, 4, 4)}};
  CHECK(jaccard_correspondence(gold, gold, dims).mean_jaccard == doctest::Approx(1.0));
  CHECK(jaccard_correspondence({{"r", block(10, 10, 4, 4)}}, gold, dims).mean_jaccard == 0.0);
  // 4x4 vs the 4x4 shifted by 2 columns: 8 shared of 24.
  CHECK(jaccard_correspondence({{"r", block(2, 0, 4, 4)}}, gold, dims).mean_jaccard ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("jaccard: a null prediction scores zero, null gold is skipped") {
  const ImageDims dims{20, 20};
  const Assignment gold{{"a", block(0, 0, 3, 3)}, {"b", std::nullopt}};
  const Assignment pred{{"a", std::nullopt}, {"b", block(5, 5, 2, 2)}};
  const auto r = jaccard_correspondence(pred, gold, dims);
  CHECK(r.jaccard.size() == 1);
  CHECK(r.jaccard.at("a") == 0.0);
  CHECK(r.matched_components == 0);
  CHECK_THROWS_AS(jaccard_correspondence(pred, {{"b", std::nullopt}}, dims), Error);
}

TEST_CASE("rasterize: points give a clipped 3x3 block, contours a dilated line") {
  const ImageDims dims{10, 10};
  CHECK(rasterize(PointFeature{{5, 5}}, dims).size() == 9);
  CHECK(rasterize(PointFeature{{0, 0}}, dims).size() == 4);
  const Contour c{{{2, 5}, {6, 5}}, 1.0, false};
  CHECK(polyline_pixels(c.points).size() == 5);
  CHECK(rasterize(c, dims).size() == 21);
}

TEST_CASE("property: jaccard is symmetric, bounded, and one on itself") {
  std::mt19937 g(51);
  const ImageDims dims{24, 24};
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = rasterize(testsupport::random_primitive(g, 24, 24), dims);
    const auto b = rasterize(testsupport::random_primitive(g, 24, 24), dims);
    const double ab = jaccard(a, b);
    CHECK(ab == doctest::Approx(jaccard(b, a)));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(jaccard(a, a) == 1.0);
  }
}

TEST_CASE("classification accuracy and summary") {
  std::vector<EvalRow> rows(4);
  rows[0].label_positive = true, rows[0].predicted_positive = true;
  rows[1].label_positive = true, rows[1].predicted_positive = false;
  rows[2].label_positive = false, rows[2].predicted_positive = false;
  rows[3].label_positive = false, rows[3].predicted_positive = false;
  rows[0].result.jaccard = {{"a", 1.0}};
  rows[0].result.mean_jaccard = 1.0;
  rows[1].result.jaccard = {{"a", 0.5}};
  rows[1].result.mean_jaccard = 0.5;
  const auto s = summarize(rows);
  CHECK(s.classification.accuracy() == doctest::Approx(0.75));
  CHECK(s.classification.fn == 1);
  CHECK(s.mean_jaccard == doctest::Approx(0.75));
  CHECK(s.component_means.at("a") == doctest::Approx(0.75));
  const auto csv = eval_csv(rows, {"a"});
  CHECK(csv.rfind("id,label,predicted,score,mean_jaccard,a\n", 0) == 0);
  CHECK(csv.find(",negative,negative,0.000000,,\n") != std::string::npos);
}
