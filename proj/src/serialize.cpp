#include "mirc/serialize.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mirc/error.hpp"

namespace mirc {

using nlohmann::json;

namespace {

PointKind point_kind_from_string(const std::string& s) {
  if (s == "endpoint") return PointKind::kContourEndpoint;
  if (s == "junction") return PointKind::kJunction;
  if (s == "peak") return PointKind::kGradientPeak;
  throw Error(ErrorCode::kInvalidArgument, "unknown point kind: " + s);
}

json vec_to_json(Vec2 v) { return json::array({v.x, v.y}); }
Vec2 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::string base64(const std::string& bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                   (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                   static_cast<std::uint8_t>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    const bool two = i + 1 < bytes.size();
    const auto n = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                   (two ? static_cast<std::uint8_t>(bytes[i + 1]) << 8 : 0);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += two ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

// Fixed-precision numbers keep SVG output byte-stable.
std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

json primitive_to_json(const Primitive& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointFeature>) {
          return {{"type", "point"}, {"position", vec_to_json(v.position)},
                  {"kind", std::string(to_string(v.kind))}, {"strength", v.strength}};
        } else if constexpr (std::is_same_v<T, Contour>) {
          json pts = json::array();
          for (const auto& q : v.points) pts.push_back(vec_to_json(q));
          return {{"type", "contour"}, {"points", pts}, {"closed", v.closed},
                  {"mean_strength", v.mean_strength}};
        } else {
          json mask = json::array();
          for (const auto& q : v.mask) mask.push_back({q.x, q.y});
          return {{"type", "region"}, {"mask", mask}, {"area", v.area},
                  {"centroid", vec_to_json(v.centroid)}, {"mean_intensity", v.mean_intensity}};
        }
      },
      p);
}

Primitive primitive_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "point") {
    PointFeature f;
    f.position = vec_from_json(j.at("position"));
    f.kind = point_kind_from_string(j.value("kind", std::string("peak")));
    f.strength = j.value("strength", 0.0);
    return f;
  }
  if (type == "contour") {
    Contour c;
    for (const auto& q : j.at("points")) c.points.push_back(vec_from_json(q));
    c.closed = j.value("closed", false);
    c.mean_strength = j.value("mean_strength", 0.0);
    return c;
  }
  if (type == "region") {
    Region r;
    for (const auto& q : j.at("mask")) r.mask.push_back({q.at(0).get<int>(), q.at(1).get<int>()});
    std::sort(r.mask.begin(), r.mask.end(),
              [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    r.area = static_cast<int>(r.mask.size());
    if (j.contains("centroid")) {
      r.centroid = vec_from_json(j.at("centroid"));
    } else if (!r.mask.empty()) {
      double sx = 0, sy = 0;
      for (const auto& q : r.mask) {
        sx += q.x;
        sy += q.y;
      }
      r.centroid = {sx / r.area, sy / r.area};
    }
    r.mean_intensity = j.value("mean_intensity", 0.0);
    return r;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown primitive type: " + type);
}

json assignment_to_json(const Assignment& a) {
  json j = json::object();
  for (const auto& [name, prim] : a) j[name] = prim ? primitive_to_json(*prim) : json(nullptr);
  return j;
}

Assignment assignment_from_json(const json& j) {
  Assignment a;
  for (const auto& [name, v] : j.items()) {
    a[name] = v.is_null() ? std::nullopt : std::optional<Primitive>(primitive_from_json(v));
  }
  return a;
}

std::string primitives_to_json(const PrimitiveSet& set) {
  json j;
  j["width"] = set.width;
  j["height"] = set.height;
  json pts = json::array(), cs = json::array(), rs = json::array();
  for (const auto& p : set.points) pts.push_back(primitive_to_json(p));
  for (const auto& c : set.contours) cs.push_back(primitive_to_json(c));
  for (const auto& r : set.regions) rs.push_back(primitive_to_json(r));
  j["points"] = pts;
  j["contours"] = cs;
  j["regions"] = rs;
  return j.dump(2) + "\n";
}

PrimitiveSet primitives_from_json(const std::string& text) {
  PrimitiveSet set;
  try {
    const auto j = json::parse(text);
    set.width = j.at("width").get<int>();
    set.height = j.at("height").get<int>();
    for (const auto& p : j.at("points")) set.points.push_back(std::get<PointFeature>(primitive_from_json(p)));
    for (const auto& c : j.at("contours")) set.contours.push_back(std::get<Contour>(primitive_from_json(c)));
    for (const auto& r : j.at("regions")) set.regions.push_back(std::get<Region>(primitive_from_json(r)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad primitive file: ") + e.what());
  } catch (const std::bad_variant_access&) {
    throw Error(ErrorCode::kKindMismatch, "primitive listed under the wrong kind");
  }
  return set;
}

std::string interpretation_to_json(const Interpretation& interp, const InterpretationModel& model) {
  json j;
  j["class_label"] = model.class_label;
  j["score"] = interp.score;
  j["threshold"] = model.threshold;
  j["recognized"] = interp.score >= model.threshold;
  j["assignment"] = assignment_to_json(interp.assignment);
  j["features"] = interp.features;
  return j.dump(2) + "\n";
}

std::string annotation_to_json(const Annotation& a) {
  json j;
  j["gold"] = assignment_to_json(a.gold);
  if (a.positive) j["label"] = *a.positive ? "positive" : "negative";
  return j.dump(2) + "\n";
}

Annotation annotation_from_json(const std::string& text) {
  Annotation a;
  try {
    const auto j = json::parse(text);
    a.gold = assignment_from_json(j.at("gold"));
    if (j.contains("label")) {
      const auto label = j.at("label").get<std::string>();
      if (label != "positive" && label != "negative") {
        throw Error(ErrorCode::kInvalidArgument, "label must be positive or negative");
      }
      a.positive = label == "positive";
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad annotation file: ") + e.what());
  }
  return a;
}

std::string manifest_to_json(const std::vector<ManifestEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"id", e.id}, {"image", e.image}, {"gold", e.gold},
                   {"label", e.positive ? "positive" : "negative"}});
  }
  return json{{"examples", arr}}.dump(2) + "\n";
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  const auto text = read_text_file(path);
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> out;
  try {
    const auto j = json::parse(text);
    for (const auto& e : j.at("examples")) {
      ManifestEntry m;
      m.id = e.at("id").get<std::string>();
      m.image = (dir / e.at("image").get<std::string>()).string();
      m.gold = (dir / e.at("gold").get<std::string>()).string();
      const auto label = e.value("label", std::string("positive"));
      if (label != "positive" && label != "negative") {
        throw Error(ErrorCode::kInvalidArgument, "manifest label must be positive or negative");
      }
      m.positive = label == "positive";
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad manifest: ") + e.what());
  }
  return out;
}

std::string render_svg(const Image& image, const std::vector<SvgLayer>& layers, int pixel_scale) {
  static constexpr std::array<const char*, 8> kPalette = {
      "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45"};
  const int s = pixel_scale;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << image.width() * s << "\" height=\""
     << image.height() * s << "\" viewBox=\"0 0 " << image.width() << ' ' << image.height() << "\">\n";
  os << "<image width=\"" << image.width() << "\" height=\"" << image.height()
     << "\" style=\"image-rendering:pixelated\" href=\"data:image/png;base64,"
     << base64(encode_png(image)) << "\"/>\n";
  for (const auto& layer : layers) {
    std::size_t color = 0;
    for (const auto& [name, prim] : layer.assignment) {
      const char* c = kPalette[color++ % kPalette.size()];
      if (!prim) continue;
      os << "<g class=\"component\" data-name=\"" << name << "\">";
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointFeature>) {
              os << "<circle cx=\"" << num(v.position.x + 0.5) << "\" cy=\"" << num(v.position.y + 0.5)
                 << "\" r=\"0.8\" fill=\"none\" stroke=\"" << c << "\" stroke-width=\"0.3\"/>";
            } else if constexpr (std::is_same_v<T, Contour>) {
              os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"0.3\" points=\"";
              for (std::size_t i = 0; i < v.points.size(); ++i) {
                os << (i ? " " : "") << num(v.points[i].x + 0.5) << ',' << num(v.points[i].y + 0.5);
              }
              if (v.closed && !v.points.empty()) {
                os << ' ' << num(v.points[0].x + 0.5) << ',' << num(v.points[0].y + 0.5);
              }
              os << "\"/>";
            } else {
              os << "<path fill=\"" << c << "\" fill-opacity=\"0.35\" d=\"";
              for (const auto& q : v.mask) os << 'M' << q.x << ' ' << q.y << "h1v1h-1z";
              os << "\"/>";
            }
          },
          *prim);
      os << "</g>\n";
    }
    if (!layer.label.empty()) {
      os << "<text x=\"0.5\" y=\"2\" font-size=\"2\" fill=\"#ffff00\">" << layer.label << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace mirc
