#include "mirc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mirc/error.hpp"

namespace mirc {

namespace {

Pixel rounded(Vec2 v) {
  return {static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y))};
}

void normalize(std::vector<Pixel>& px) {
  std::sort(px.begin(), px.end());
  px.erase(std::unique(px.begin(), px.end()), px.end());
}

std::vector<Pixel> dilate_clip(const std::vector<Pixel>& px, ImageDims dims) {
  std::vector<Pixel> out;
  out.reserve(px.size() * 9);
  for (const auto& p : px)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const Pixel q{p.x + dx, p.y + dy};
        if (q.x >= 0 && q.y >= 0 && q.x < dims.width && q.y < dims.height) out.push_back(q);
      }
  normalize(out);
  return out;
}

}  // namespace

std::vector<Pixel> polyline_pixels(const std::vector<Vec2>& points) {
  std::vector<Pixel> out;
  if (points.empty()) return out;
  out.push_back(rounded(points.front()));
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Pixel a = rounded(points[i - 1]);
    const Pixel b = rounded(points[i]);
    const int steps = std::max(std::abs(b.x - a.x), std::abs(b.y - a.y));
    for (int s = 1; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      out.push_back({static_cast<int>(std::lround(a.x + t * (b.x - a.x))),
                     static_cast<int>(std::lround(a.y + t * (b.y - a.y)))});
    }
  }
  normalize(out);
  return out;
}

std::vector<Pixel> rasterize(const Primitive& p, ImageDims dims) {
  if (const auto* r = std::get_if<Region>(&p)) {
    std::vector<Pixel> out;
    for (const auto& q : r->mask)
      if (q.x >= 0 && q.y >= 0 && q.x < dims.width && q.y < dims.height) out.push_back(q);
    normalize(out);
    return out;
  }
  if (const auto* c = std::get_if<Contour>(&p)) return dilate_clip(polyline_pixels(c->points), dims);
  const auto& pt = std::get<PointFeature>(p);
  return dilate_clip({rounded(pt.position)}, dims);
}

double jaccard(const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double Classification::accuracy() const {
  const auto n = tp + fp + tn + fn;
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

void Classification::add(bool predicted_positive, bool actually_positive) {
  if (predicted_positive) {
    ++(actually_positive ? tp : fp);
  } else {
    ++(actually_positive ? fn : tn);
  }
}

EvalResult jaccard_correspondence(const Assignment& pred, const Assignment& gold, ImageDims dims) {
  EvalResult out;
  double sum = 0.0;
  for (const auto& [name, g] : gold) {
    if (!g) continue;
    const auto it = pred.find(name);
    double j = 0.0;
    if (it != pred.end() && it->second) {
      j = jaccard(rasterize(*it->second, dims), rasterize(*g, dims));
      if (j > 0.0) ++out.matched_components;
    }
    out.jaccard[name] = j;
    sum += j;
  }
  if (out.jaccard.empty()) {
    throw Error(ErrorCode::kNothingToEvaluate, "nothing to evaluate: every gold component is null");
  }
  out.mean_jaccard = sum / static_cast<double>(out.jaccard.size());
  return out;
}

std::string eval_csv(const std::vector<EvalRow>& rows, const std::vector<std::string>& components) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed;
  os << "id,label,predicted,score,mean_jaccard";
  for (const auto& c : components) os << ',' << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r.id << ',' << (r.label_positive ? "positive" : "negative") << ','
       << (r.predicted_positive ? "positive" : "negative") << ',' << r.score << ',';
    // Rows without gold geometry (negatives) leave the Jaccard cells empty.
    if (!r.result.jaccard.empty()) os << r.result.mean_jaccard;
    for (const auto& c : components) {
      os << ',';
      if (const auto it = r.result.jaccard.find(c); it != r.result.jaccard.end()) os << it->second;
    }
    os << '\n';
  }
  return os.str();
}

EvalSummary summarize(const std::vector<EvalRow>& rows) {
  EvalSummary s;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    s.classification.add(r.predicted_positive, r.label_positive);
    if (r.result.jaccard.empty()) continue;
    total += r.result.mean_jaccard;
    ++n;
    for (const auto& [name, j] : r.result.jaccard) {
      acc[name].first += j;
      ++acc[name].second;
    }
  }
  s.mean_jaccard = n == 0 ? 0.0 : total / static_cast<double>(n);
  for (const auto& [name, v] : acc) s.component_means[name] = v.first / static_cast<double>(v.second);
  return s;
}

}  // namespace mirc
