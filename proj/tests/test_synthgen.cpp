#include <cmath>
#include <limits>

#include "doctest.h"
#include "mirc/synthgen.hpp"

using namespace mirc;

namespace {

double brute_mask_distance(const Primitive& a, const Primitive& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : std::get<Region>(a).mask)
    for (const auto& q : std::get<Region>(b).mask) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
  return best;
}

bool every_component_present(const GlyphSample& g) {
  for (const auto& name : {"torso-region-1", "torso-region-2", "arm-contour-1", "arm-contour-2", "palm-region"}) {
    const auto it = g.gold.find(name);
    if (it == g.gold.end() || !it->second) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  for (std::uint32_t s = 0; s < 5; ++s) {
    const auto a = generate(s, Label::kPositive), b = generate(s, Label::kPositive);
    CHECK(a.image == b.image);
    CHECK(placement_to_json(a.placement) == placement_to_json(b.placement));
  }
  CHECK_FALSE(generate(1, Label::kPositive).image == generate(2, Label::kPositive).image);
}

TEST_CASE("property: positives touch within 1 px and negatives keep 4 px") {
  for (std::uint32_t s = 0; s < 60; ++s) {
    const auto label = s % 2 ? Label::kNegative : Label::kPositive;
    const auto g = generate(s, label);
    REQUIRE(every_component_present(g));
    CHECK(g.image.width() == 30);
    const double d = brute_mask_distance(*g.gold.at("palm-region"), *g.gold.at("torso-region-2"));
    if (label == Label::kPositive) {
      CHECK(d <= 1.0);
    } else {
      CHECK(d >= 4.0);
    }
  }
}

TEST_CASE("property: low glyphs lose every palm pixel to a 24x24 top-left crop") {
  for (std::uint32_t s = 0; s < 30; ++s) {
    const auto g = generate(s, Label::kPositive, 30, 30, GlyphOptions{true});
    REQUIRE(every_component_present(g));
    for (const auto& p : std::get<Region>(*g.gold.at("palm-region")).mask) CHECK((p.x >= 24 || p.y >= 24));
    CHECK(brute_mask_distance(*g.gold.at("palm-region"), *g.gold.at("torso-region-2")) <= 1.0);
  }
}

TEST_CASE("scenes plant non-overlapping glyph boxes and translate gold") {
  for (std::uint32_t s = 0; s < 5; ++s) {
    const auto sc = generate_scene(s, 2);
    REQUIRE(sc.planted.size() == 2);
    CHECK(box_iou(sc.planted[0].box, sc.planted[1].box) == 0.0);
    for (const auto& p : sc.planted) {
      CHECK(p.box.x >= 0);
      CHECK(p.box.x + p.box.w <= sc.image.width());
      // The glyph pixels sit verbatim inside the box.
      CHECK(sc.image.crop(p.box.x, p.box.y, p.box.w, p.box.h) == p.glyph.image);
    }
    const auto global = to_scene_coordinates(sc.planted[0].glyph.gold, sc.planted[0].box);
    const auto& lp = std::get<Region>(*sc.planted[0].glyph.gold.at("palm-region")).mask.front();
    const auto& gp = std::get<Region>(*global.at("palm-region")).mask.front();
    CHECK(gp.x == lp.x + sc.planted[0].box.x);
    CHECK(gp.y == lp.y + sc.planted[0].box.y);
  }
}
