#include "mirc/fullimage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "json.hpp"
#include "mirc/error.hpp"
#include "mirc/evaluation.hpp"
#include "mirc/serialize.hpp"

namespace mirc {

namespace {

struct Job {
  std::size_t scale_index;
  std::size_t model;
  int x, y;  // in the scaled image
};

std::optional<SearchResult> interpret_window(const Image& img, const InterpretationModel& model,
                                             const SearchConfig& search,
                                             const ExtractionParams& extraction) {
  try {
    const auto prims = extract_primitives(img, extraction);
    const auto table = build_candidates(model, prims, search.max_candidates);
    return interpret(model, table, search);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUninterpretable) return std::nullopt;
    throw;
  }
}

std::vector<int> positions(int extent, int window, int stride) {
  std::vector<int> out;
  for (int p = 0; p + window <= extent; p += stride) out.push_back(p);
  // Cover the far edge too when the stride does not land on it.
  if (!out.empty() && out.back() + window < extent) out.push_back(extent - window);
  return out;
}

bool boxes_overlap(const Box& a, const Box& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

}  // namespace

std::vector<DetectedConfiguration> non_max_suppression(std::vector<DetectedConfiguration> dets,
                                                       double max_iou) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<DetectedConfiguration> kept;
  for (auto& d : dets) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return box_iou(k.window, d.window) > max_iou;
    });
    if (!clash) kept.push_back(std::move(d));
  }
  return kept;
}

ScanResult scan(const Image& image, const std::vector<InterpretationModel>& models,
                const ScanParams& params) {
  if (params.stride < 1) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  ScanResult result;
  std::vector<Image> scaled;
  for (const double s : params.scales) {
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scales must be positive");
    const int w = static_cast<int>(std::lround(image.width() * s));
    const int h = static_cast<int>(std::lround(image.height() * s));
    if (w < 1 || h < 1) {
      scaled.emplace_back();
    } else {
      scaled.push_back(w == image.width() && h == image.height() ? image : resample_area(image, w, h));
    }
  }

  std::vector<Job> jobs;
  for (std::size_t si = 0; si < scaled.size(); ++si) {
    const auto& img = scaled[si];
    for (std::size_t m = 0; m < models.size(); ++m) {
      for (const int y : positions(img.height(), models[m].native_height, params.stride))
        for (const int x : positions(img.width(), models[m].native_width, params.stride))
          jobs.push_back({si, m, x, y});
    }
  }
  result.too_small = jobs.empty() && !models.empty();
  result.windows_evaluated = jobs.size();

  std::vector<std::optional<DetectedConfiguration>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      const auto& model = models[job.model];
      const auto window = scaled[job.scale_index].crop(job.x, job.y, model.native_width, model.native_height);
      const auto res = interpret_window(window, model, params.search, params.extraction);
      if (!res || res->interpretation.score < model.threshold) continue;
      const double s = params.scales[job.scale_index];
      DetectedConfiguration d;
      d.window = {static_cast<int>(std::lround(job.x / s)), static_cast<int>(std::lround(job.y / s)),
                  static_cast<int>(std::lround(model.native_width / s)),
                  static_cast<int>(std::lround(model.native_height / s))};
      d.window.w = std::min(d.window.w, image.width() - d.window.x);
      d.window.h = std::min(d.window.h, image.height() - d.window.y);
      d.scale = s;
      d.model = job.model;
      d.interpretation = res->interpretation;
      d.score = d.interpretation.score;
      slots[i] = std::move(d);
    }
  };
  unsigned n = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<DetectedConfiguration> dets;
  for (auto& s : slots)
    if (s) dets.push_back(std::move(*s));
  result.detections = non_max_suppression(std::move(dets), params.nms_iou);
  return result;
}

DetectedConfiguration refine(const DetectedConfiguration& det, const Image& full,
                             const InterpretationModel& model, const SearchConfig& search,
                             const ExtractionParams& extraction) {
  DetectedConfiguration out = det;
  out.unrefined_score = det.score;
  const auto window = full.crop(det.window.x, det.window.y, det.window.w, det.window.h);
  // An uninterpretable refinement keeps the original reading.
  if (const auto res = interpret_window(window, model, search, extraction)) {
    out.scale = 1.0;
    out.interpretation = res->interpretation;
    out.score = out.interpretation.score;
  }
  return out;
}

Primitive to_global(const Primitive& local, const DetectedConfiguration& det) {
  const double s = det.scale;
  const double ox = det.window.x, oy = det.window.y;
  if (s == 1.0) return translated(local, ox, oy);
  return std::visit(
      [&](const auto& v) -> Primitive {
        using T = std::decay_t<decltype(v)>;
        T out = v;
        if constexpr (std::is_same_v<T, PointFeature>) {
          out.position = {ox + v.position.x / s, oy + v.position.y / s};
        } else if constexpr (std::is_same_v<T, Contour>) {
          for (auto& q : out.points) q = {ox + q.x / s, oy + q.y / s};
        } else {
          std::set<Pixel, decltype([](Pixel a, Pixel b) {
                     return a.y != b.y ? a.y < b.y : a.x < b.x;
                   })> cover;
          for (const auto& q : v.mask) {
            const int x0 = static_cast<int>(std::floor(ox + q.x / s + 1e-9));
            const int x1 = static_cast<int>(std::ceil(ox + (q.x + 1) / s - 1e-9));
            const int y0 = static_cast<int>(std::floor(oy + q.y / s + 1e-9));
            const int y1 = static_cast<int>(std::ceil(oy + (q.y + 1) / s - 1e-9));
            for (int y = y0; y < y1; ++y)
              for (int x = x0; x < x1; ++x) cover.insert({x, y});
          }
          out.mask.assign(cover.begin(), cover.end());
          out.area = static_cast<int>(out.mask.size());
          double sx = 0, sy = 0;
          for (const auto& q : out.mask) {
            sx += q.x;
            sy += q.y;
          }
          if (out.area > 0) out.centroid = {sx / out.area, sy / out.area};
        }
        return out;
      },
      local);
}

Primitive to_local(const Primitive& global, const DetectedConfiguration& det) {
  if (det.scale != 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "to_local needs a scale-1 detection");
  }
  return translated(global, -det.window.x, -det.window.y);
}

std::size_t GlobalInterpretation::count(const std::string& component) const {
  return static_cast<std::size_t>(std::count_if(
      claims.begin(), claims.end(), [&](const auto& c) { return c.component == component; }));
}

GlobalInterpretation combine(const std::vector<DetectedConfiguration>& dets, ImageDims full) {
  GlobalInterpretation out;
  struct Raw {
    std::size_t det;
    std::string component;
    Primitive primitive;
    std::vector<Pixel> mask;
  };
  std::vector<Raw> raws;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    out.contributing_windows.push_back(dets[i].window);
    for (const auto& [name, prim] : dets[i].interpretation.assignment) {
      if (!prim) continue;
      auto g = to_global(*prim, dets[i]);
      auto mask = rasterize(g, full);
      raws.push_back({i, name, std::move(g), std::move(mask)});
    }
  }
  // Strongest claims settle first; ties keep detection order.
  std::stable_sort(raws.begin(), raws.end(),
                   [&](const Raw& a, const Raw& b) { return dets[a.det].score > dets[b.det].score; });
  for (auto& r : raws) {
    bool absorbed = false;
    for (auto& c : out.claims) {
      if (c.component != r.component) continue;
      const bool overlapping = std::any_of(c.windows.begin(), c.windows.end(), [&](std::size_t w) {
        return boxes_overlap(dets[w].window, dets[r.det].window);
      });
      if (!overlapping) continue;
      if (jaccard(c.mask, r.mask) >= 0.5) {
        std::vector<Pixel> merged;
        std::set_union(c.mask.begin(), c.mask.end(), r.mask.begin(), r.mask.end(),
                       std::back_inserter(merged),
                       [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
        c.mask = std::move(merged);
        c.confidence = std::max(c.confidence, dets[r.det].score);
        c.windows.push_back(r.det);
      }
      // Either merged or beaten by a stronger overlapping claim.
      absorbed = true;
      break;
    }
    if (!absorbed) {
      out.claims.push_back({r.component, std::move(r.primitive), std::move(r.mask), dets[r.det].score, {r.det}});
    }
  }
  return out;
}

std::string scan_to_json(const ScanResult& result, const GlobalInterpretation& global,
                         const std::vector<InterpretationModel>& models) {
  using nlohmann::json;
  json j;
  j["too_small"] = result.too_small;
  j["windows_evaluated"] = result.windows_evaluated;
  json dets = json::array();
  for (const auto& d : result.detections) {
    json e = {{"window", {d.window.x, d.window.y, d.window.w, d.window.h}},
              {"scale", d.scale},
              {"model", models.at(d.model).class_label},
              {"score", d.score},
              {"assignment", assignment_to_json(d.interpretation.assignment)}};
    if (d.unrefined_score) e["unrefined_score"] = *d.unrefined_score;
    dets.push_back(e);
  }
  j["detections"] = dets;
  json claims = json::array();
  for (const auto& c : global.claims) {
    claims.push_back({{"component", c.component},
                      {"confidence", c.confidence},
                      {"windows", c.windows},
                      {"primitive", primitive_to_json(c.primitive)}});
  }
  j["global"] = claims;
  return j.dump(2) + "\n";
}

}  // namespace mirc
