#include <filesystem>

#include "doctest.h"
#include "mirc/config.hpp"
#include "mirc/error.hpp"
#include "mirc/serialize.hpp"
#include "mirc/synthgen.hpp"
#include "support.hpp"

using namespace mirc;

namespace {

ErrorCode config_error(const std::string& text) {
  try {
    config_from_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("config: defaults") {
  const RunConfig c;
  CHECK(c.reduce_factor == 0.8);
  CHECK(c.search.max_candidates == 8);
  CHECK(c.search.beam_width == 50);
  CHECK(c.epochs == 20);
  CHECK(c.train_config().search.beam_width == c.search.beam_width);
  CHECK_FALSE(c.train_config().shuffle_seed.has_value());
  CHECK(c.scan_params().scales == std::vector<double>{1.0, 0.75, 0.5});
}

TEST_CASE("config: partial files override only their keys") {
  const auto c = config_from_json(R"({"seed": 9, "search": {"beam_width": 7}, "train": {"shuffle": true}})");
  CHECK(c.seed == 9);
  CHECK(c.search.beam_width == 7);
  CHECK(c.search.max_candidates == 8);
  CHECK(c.train_config().shuffle_seed == 9u);
}

TEST_CASE("config: unknown keys, bad types and bad JSON are rejected") {
  CHECK(config_error(R"({"sead": 1})") == ErrorCode::kInvalidConfig);
  CHECK(config_error(R"({"search": {"beam": 3}})") == ErrorCode::kInvalidConfig);
  CHECK(config_error(R"({"search": 3})") == ErrorCode::kInvalidConfig);
  CHECK(config_error(R"({"epochs_typo": {}})") == ErrorCode::kInvalidConfig);
  CHECK(config_error(R"({"train": {"epochs": "many"}})") == ErrorCode::kInvalidConfig);
  CHECK(config_error("{nope") == ErrorCode::kInvalidConfig);
}

TEST_CASE("config: dump and reload is a fixed point") {
  RunConfig c;
  c.seed = 3;
  c.scales = {1.0, 0.6};
  c.margin = 1.5;
  const auto text = config_to_json(c);
  CHECK(config_to_json(config_from_json(text)) == text);
}

TEST_CASE("property: primitive JSON round trip") {
  std::mt19937 g(61);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testsupport::random_primitive(g, 30, 30);
    CHECK(primitive_from_json(primitive_to_json(p)) == p);
  }
}

TEST_CASE("annotation and primitive set round trips") {
  const auto glyph = generate(12, Label::kPositive);
  Annotation a{glyph.gold, true};
  const auto back = annotation_from_json(annotation_to_json(a));
  CHECK(back.gold == a.gold);
  CHECK(back.positive == true);
  const auto set = extract_primitives(glyph.image);
  CHECK(primitives_from_json(primitives_to_json(set)) == set);
}

TEST_CASE("manifest paths resolve relative to the manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "mirc_manifest_test";
  std::filesystem::create_directories(dir);
  write_text_file((dir / "m.json").string(), manifest_to_json({{"g0", "g0.pgm", "g0.json", false}}));
  const auto entries = load_manifest((dir / "m.json").string());
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].id == "g0");
  CHECK(std::filesystem::path(entries[0].image) == dir / "g0.pgm");
  CHECK_FALSE(entries[0].positive);
}

TEST_CASE("svg rendering is deterministic and embeds the image") {
  const auto glyph = generate(13, Label::kPositive);
  const std::vector<SvgLayer> layers{{glyph.gold, "gold"}};
  const auto svg = render_svg(glyph.image, layers);
  CHECK(svg == render_svg(glyph.image, layers));
  CHECK(svg.find("data:image/png;base64,") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
}
