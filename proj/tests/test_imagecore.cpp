#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mirc/error.hpp"
#include "mirc/image.hpp"
#include "mirc/synthgen.hpp"
#include "support.hpp"

using namespace mirc;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

// Brute-force area average: blow every input pixel up to an out_w x out_h
// block, then average in_w x in_h blocks of the blown-up grid.
Image area_oracle(const Image& img, int out_w, int out_h) {
  const int in_w = img.width(), in_h = img.height();
  Image out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy)
    for (int ox = 0; ox < out_w; ++ox) {
      long long sum = 0;
      for (int Y = oy * in_h; Y < (oy + 1) * in_h; ++Y)
        for (int X = ox * in_w; X < (ox + 1) * in_w; ++X) sum += img.at(X / out_w, Y / out_h);
      const long long n = static_cast<long long>(in_w) * in_h;
      out.at(ox, oy) = static_cast<std::uint8_t>((2 * sum + n) / (2 * n));
    }
  return out;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("mirc_test_" + name); }

}  // namespace

TEST_CASE("pgm: 2x2 P5 bytes load verbatim") {
  const std::string bytes = std::string("P5\n2 2\n255\n") + std::string("\x00\x80\xff\x40", 4);
  const auto img = parse_pgm(bytes);
  CHECK(img.width() == 2);
  CHECK(img.height() == 2);
  CHECK(img.data() == std::vector<std::uint8_t>{0, 128, 255, 64});
}

TEST_CASE("pgm: a comment line after the magic is accepted") {
  const std::string bytes = std::string("P5\n# made by hand\n2 1\n255\n") + std::string("\x07\x09", 2);
  CHECK(parse_pgm(bytes).data() == std::vector<std::uint8_t>{7, 9});
}

TEST_CASE("pgm: errors are distinct") {
  CHECK(code_of([] { load_pgm("/nonexistent/dir/x.pgm"); }) == ErrorCode::kMissingFile);
  CHECK(code_of([] { parse_pgm("P2\n2 2\n255\n0 1 2 3\n"); }) == ErrorCode::kUnsupportedFormat);
  CHECK(code_of([] { parse_pgm("P5\n2 2\n65535\n"); }) == ErrorCode::kUnsupportedMaxval);
  CHECK(code_of([] { parse_pgm("P5\n2 x\n255\n"); }) == ErrorCode::kMalformedHeader);
  CHECK(code_of([] { parse_pgm(std::string("P5\n2 2\n255\n\x01\x02", 13)); }) == ErrorCode::kTruncatedData);
}

TEST_CASE("pgm: save/load round trip of generated glyphs is bit-identical") {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const auto g = generate(seed, seed % 2 ? Label::kNegative : Label::kPositive);
    const auto path = temp_file("glyph.pgm");
    save_pgm(g.image, path);
    CHECK(load_pgm(path) == g.image);
    CHECK(parse_pgm(encode_pgm(g.image)) == g.image);
  }
}

TEST_CASE("png export writes a PNG signature") {
  const auto path = temp_file("out.png");
  save_png(Image(3, 2, 100), path);
  std::ifstream in(path, std::ios::binary);
  std::string sig(8, '\0');
  in.read(sig.data(), 8);
  CHECK(sig == std::string("\x89PNG\r\n\x1a\n", 8));
}

TEST_CASE("reduce: factor 1.0 is the identity for every kind") {
  std::mt19937 g(1);
  const auto img = testsupport::random_image(g, 9, 7);
  for (auto kind : {ReductionKind::kCropTopLeft, ReductionKind::kCropTopRight, ReductionKind::kCropBottomLeft,
                    ReductionKind::kCropBottomRight, ReductionKind::kResolution}) {
    CHECK(reduce(img, {kind, 1.0}) == img);
  }
}

TEST_CASE("reduce: 10x10 top-left crop at 0.8 is the 8x8 sub-window") {
  std::mt19937 g(2);
  const auto img = testsupport::random_image(g, 10, 10);
  const auto r = reduce(img, {ReductionKind::kCropTopLeft, 0.8});
  REQUIRE(r.width() == 8);
  REQUIRE(r.height() == 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(r.at(x, y) == img.at(x, y));
}

TEST_CASE("reduce: constant image stays constant under resolution reduction") {
  const auto r = reduce(Image(10, 10, 77), {ReductionKind::kResolution, 0.8});
  CHECK(r == Image(8, 8, 77));
}

TEST_CASE("reduce: too small result is 'reduction exhausted'") {
  CHECK(code_of([] { reduce(Image(2, 2, 0), {ReductionKind::kCropTopLeft, 0.8}); }) ==
        ErrorCode::kReductionExhausted);
  CHECK(code_of([] { descendants(Image(2, 2, 0), 0.8); }) == ErrorCode::kReductionExhausted);
}

TEST_CASE("reduced extent uses the ceiling and lands 0.8*30 on 24") {
  CHECK(reduced_extent(30, 0.8) == 24);
  CHECK(reduced_extent(10, 0.8) == 8);
  CHECK(reduced_extent(11, 0.8) == 9);
  CHECK(reduced_extent(7, 0.5) == 4);
}

TEST_CASE("descendants: five 24x24 images from 30x30, constants stay constant") {
  const auto d = descendants(Image(30, 30, 5), 0.8);
  REQUIRE(d.size() == 5);
  for (const auto& e : d) CHECK(e.image == Image(24, 24, 5));
  CHECK(d[4].step.kind == ReductionKind::kResolution);
}

TEST_CASE("property: crop descendants are pixel-exact shifted sub-windows") {
  std::mt19937 g(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = testsupport::uniform_int(g, 3, 20), h = testsupport::uniform_int(g, 3, 20);
    const double f = testsupport::uniform(g, 0.5, 1.0);
    const auto img = testsupport::random_image(g, w, h);
    const int cw = reduced_extent(w, f), ch = reduced_extent(h, f);
    if (cw == w && ch == h) {
      CHECK(code_of([&] { descendants(img, f); }) == ErrorCode::kReductionExhausted);
      continue;
    }
    const auto d = descendants(img, f);
    const int offs[4][2] = {{0, 0}, {w - cw, 0}, {0, h - ch}, {w - cw, h - ch}};
    for (int k = 0; k < 4; ++k) {
      REQUIRE(d[k].image.width() == cw);
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) CHECK(d[k].image.at(x, y) == img.at(x + offs[k][0], y + offs[k][1]));
    }
  }
}

TEST_CASE("property: resolution reduction equals the brute-force area average") {
  std::mt19937 g(4);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = testsupport::uniform_int(g, 2, 16), h = testsupport::uniform_int(g, 2, 16);
    const auto img = testsupport::random_image(g, w, h);
    const int ow = testsupport::uniform_int(g, 1, w), oh = testsupport::uniform_int(g, 1, h);
    CHECK(resample_area(img, ow, oh) == area_oracle(img, ow, oh));
  }
}

TEST_CASE("property: resolution reduction keeps the mean within one gray level") {
  std::mt19937 g(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = testsupport::uniform_int(g, 5, 40), h = testsupport::uniform_int(g, 5, 40);
    const auto img = testsupport::random_image(g, w, h);
    const auto r = reduce(img, {ReductionKind::kResolution, 0.8});
    CHECK(std::abs(r.mean() - img.mean()) <= 1.0);
  }
}

TEST_CASE("box iou") {
  CHECK(box_iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(box_iou({0, 0, 10, 10}, {20, 20, 5, 5}) == 0.0);
  CHECK(box_iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));
}
