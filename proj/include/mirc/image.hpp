#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mirc {

/// 8-bit single-channel raster, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);
  Image(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  /// Sub-window copy; the window must lie inside the image.
  Image crop(int x, int y, int w, int h) const;
  Image transposed() const;
  double mean() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Axis-aligned pixel window.
struct Box {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

double box_iou(const Box& a, const Box& b);

enum class ReductionKind {
  kCropTopLeft,
  kCropTopRight,
  kCropBottomLeft,
  kCropBottomRight,
  kResolution,
};

std::string_view to_string(ReductionKind kind);

struct ReductionStep {
  ReductionKind kind = ReductionKind::kResolution;
  double factor = 0.8;
};

struct Descendant {
  ReductionStep step;
  Image image;
};

/// Reduced dimension: ceil(factor * n), computed so that exact products such
/// as 0.8 * 30 land on 24 rather than 25.
int reduced_extent(int n, double factor);

Image reduce(const Image& img, const ReductionStep& step);

/// Area-averaging resample to an arbitrary size (used by reduce and by the
/// multi-scale scan).
Image resample_area(const Image& img, int out_w, int out_h);

/// The four corner crops followed by the resolution reduction.
std::vector<Descendant> descendants(const Image& img, double factor = 0.8);

Image load_pgm(const std::filesystem::path& path);
Image parse_pgm(std::string_view bytes);
void save_pgm(const Image& img, const std::filesystem::path& path);
std::string encode_pgm(const Image& img);

/// 8-bit grayscale PNG; export only.
void save_png(const Image& img, const std::filesystem::path& path);
std::string encode_png(const Image& img);

}  // namespace mirc
