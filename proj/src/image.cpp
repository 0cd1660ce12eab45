#include "mirc/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mirc/error.hpp"

namespace mirc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "missing file";
    case ErrorCode::kMalformedHeader: return "malformed header";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kUnsupportedMaxval: return "unsupported maxval";
    case ErrorCode::kTruncatedData: return "truncated data";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kReductionExhausted: return "reduction exhausted";
    case ErrorCode::kImageTooSmall: return "image too small";
    case ErrorCode::kKindMismatch: return "kind mismatch";
    case ErrorCode::kUnknownComponent: return "unknown component";
    case ErrorCode::kInvalidModel: return "invalid model";
    case ErrorCode::kUninterpretable: return "uninterpretable region";
    case ErrorCode::kUseBeam: return "use beam";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNoGroundedPositives: return "no grounded positives";
    case ErrorCode::kIndexOutOfRange: return "index out of range";
    case ErrorCode::kNothingToEvaluate: return "nothing to evaluate";
    case ErrorCode::kPlacementFailed: return "placement failed";
    case ErrorCode::kInvalidConfig: return "invalid config";
  }
  return "unknown error";
}

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be >= 1");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be >= 1");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer size mismatch");
  }
}

Image Image::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > width_ || y + h > height_) {
    throw Error(ErrorCode::kInvalidArgument, "crop window outside image");
  }
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(w) * h);
  for (int yy = y; yy < y + h; ++yy) {
    auto row = data_.begin() + static_cast<std::ptrdiff_t>(index(x, yy));
    out.insert(out.end(), row, row + w);
  }
  return Image(w, h, std::move(out));
}

Image Image::transposed() const {
  Image out(height_, width_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(y, x) = at(x, y);
  return out;
}

double Image::mean() const {
  std::uint64_t sum = 0;
  for (auto v : data_) sum += v;
  return data_.empty() ? 0.0 : static_cast<double>(sum) / data_.size();
}

double box_iou(const Box& a, const Box& b) {
  const int ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const int iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::string_view to_string(ReductionKind kind) {
  switch (kind) {
    case ReductionKind::kCropTopLeft: return "crop_top_left";
    case ReductionKind::kCropTopRight: return "crop_top_right";
    case ReductionKind::kCropBottomLeft: return "crop_bottom_left";
    case ReductionKind::kCropBottomRight: return "crop_bottom_right";
    case ReductionKind::kResolution: return "resolution";
  }
  return "unknown";
}

int reduced_extent(int n, double factor) {
  return static_cast<int>(std::ceil(factor * n - 1e-9));
}

Image resample_area(const Image& img, int out_w, int out_h) {
  const int in_w = img.width();
  const int in_h = img.height();
  if (out_w == in_w && out_h == in_h) return img;
  // Work in units of 1/out_w (x) and 1/out_h (y) so every overlap is an
  // integer and the average is an exact rational.
  Image out(out_w, out_h);
  const std::int64_t cell_area = static_cast<std::int64_t>(in_w) * in_h;
  for (int oy = 0; oy < out_h; ++oy) {
    const std::int64_t y0 = static_cast<std::int64_t>(oy) * in_h;
    const std::int64_t y1 = y0 + in_h;
    for (int ox = 0; ox < out_w; ++ox) {
      const std::int64_t x0 = static_cast<std::int64_t>(ox) * in_w;
      const std::int64_t x1 = x0 + in_w;
      std::int64_t acc = 0;
      for (auto sy = static_cast<int>(y0 / out_h);
           sy < in_h && static_cast<std::int64_t>(sy) * out_h < y1; ++sy) {
        const std::int64_t oy_len =
            std::min<std::int64_t>(y1, (sy + 1) * static_cast<std::int64_t>(out_h)) -
            std::max<std::int64_t>(y0, sy * static_cast<std::int64_t>(out_h));
        if (oy_len <= 0) continue;
        for (auto sx = static_cast<int>(x0 / out_w);
             sx < in_w && static_cast<std::int64_t>(sx) * out_w < x1; ++sx) {
          const std::int64_t ox_len =
              std::min<std::int64_t>(x1, (sx + 1) * static_cast<std::int64_t>(out_w)) -
              std::max<std::int64_t>(x0, sx * static_cast<std::int64_t>(out_w));
          if (ox_len <= 0) continue;
          acc += ox_len * oy_len * img.at(sx, sy);
        }
      }
      // round half up
      out.at(ox, oy) = static_cast<std::uint8_t>((2 * acc + cell_area) / (2 * cell_area));
    }
  }
  return out;
}

Image reduce(const Image& img, const ReductionStep& step) {
  if (!(step.factor > 0.0 && step.factor <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reduction factor must be in (0,1]");
  }
  const int w = reduced_extent(img.width(), step.factor);
  const int h = reduced_extent(img.height(), step.factor);
  // A step below 1 that shrinks nothing (2 px at 0.8 stays 2) is exhausted too.
  const bool no_progress = step.factor < 1.0 && w == img.width() && h == img.height();
  if (w < 2 || h < 2 || no_progress) {
    throw Error(ErrorCode::kReductionExhausted, "reduction exhausted");
  }
  switch (step.kind) {
    case ReductionKind::kCropTopLeft: return img.crop(0, 0, w, h);
    case ReductionKind::kCropTopRight: return img.crop(img.width() - w, 0, w, h);
    case ReductionKind::kCropBottomLeft: return img.crop(0, img.height() - h, w, h);
    case ReductionKind::kCropBottomRight:
      return img.crop(img.width() - w, img.height() - h, w, h);
    case ReductionKind::kResolution: return resample_area(img, w, h);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown reduction kind");
}

std::vector<Descendant> descendants(const Image& img, double factor) {
  static constexpr std::array kKinds = {
      ReductionKind::kCropTopLeft, ReductionKind::kCropTopRight,
      ReductionKind::kCropBottomLeft, ReductionKind::kCropBottomRight,
      ReductionKind::kResolution};
  std::vector<Descendant> out;
  out.reserve(kKinds.size());
  for (auto kind : kKinds) {
    ReductionStep step{kind, factor};
    out.push_back({step, reduce(img, step)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// PGM

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int() {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000) throw Error(ErrorCode::kMalformedHeader, "malformed header");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorCode::kMalformedHeader, "malformed header");
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image parse_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorCode::kMalformedHeader, "malformed header");
  }
  if (bytes[1] != '5') {
    if (bytes[1] >= '1' && bytes[1] <= '7') {
      throw Error(ErrorCode::kUnsupportedFormat, "unsupported format");
    }
    throw Error(ErrorCode::kMalformedHeader, "malformed header");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const long w = reader.read_int();
  const long h = reader.read_int();
  const long maxval = reader.read_int();
  if (w < 1 || h < 1) throw Error(ErrorCode::kMalformedHeader, "malformed header");
  if (maxval != 255) throw Error(ErrorCode::kUnsupportedMaxval, "maxval must be 255");
  if (reader.pos() >= bytes.size() || !is_space(bytes[reader.pos()])) {
    throw Error(ErrorCode::kTruncatedData, "truncated data");
  }
  reader.advance(1);
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - reader.pos() < need) {
    throw Error(ErrorCode::kTruncatedData, "truncated data");
  }
  const auto* first = reinterpret_cast<const std::uint8_t*>(bytes.data() + reader.pos());
  return Image(static_cast<int>(w), static_cast<int>(h),
               std::vector<std::uint8_t>(first, first + need));
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pgm(buf.str());
}

std::string encode_pgm(const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data().data()), img.data().size());
  return out;
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const auto bytes = encode_pgm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// PNG

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v >> 24));
  s.push_back(static_cast<char>(v >> 16));
  s.push_back(static_cast<char>(v >> 8));
  s.push_back(static_cast<char>(v));
}

void put_chunk(std::string& s, const char* type, const std::string& payload) {
  put_u32(s, static_cast<std::uint32_t>(payload.size()));
  std::string body(type, 4);
  body += payload;
  s += body;
  put_u32(s, static_cast<std::uint32_t>(
                 crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                       static_cast<uInt>(body.size()))));
}

}  // namespace

std::string encode_png(const Image& img) {
  std::string raw;
  raw.reserve(static_cast<std::size_t>(img.height()) * (img.width() + 1));
  for (int y = 0; y < img.height(); ++y) {
    raw.push_back('\0');  // filter: none
    for (int x = 0; x < img.width(); ++x) raw.push_back(static_cast<char>(img.at(x, y)));
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &zlen,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw Error(ErrorCode::kIo, "png compression failed");
  }
  z.resize(zlen);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(img.width()));
  put_u32(ihdr, static_cast<std::uint32_t>(img.height()));
  ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // 8-bit gray
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", z);
  put_chunk(png, "IEND", "");
  return png;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  const auto png = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(png.data(), static_cast<std::streamsize>(png.size()));
}

}  // namespace mirc
