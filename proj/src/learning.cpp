#include "mirc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <tuple>

#include "mirc/error.hpp"
#include "mirc/evaluation.hpp"
#include "mirc/rng.hpp"

namespace mirc {

namespace {

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double mean_polyline_distance(const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
  if (from.empty() || to.empty()) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& p : from) {
    double best = std::hypot(p.x - to[0].x, p.y - to[0].y);
    for (std::size_t i = 1; i < to.size(); ++i) best = std::min(best, segment_distance(p, to[i - 1], to[i]));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

double contour_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  return 0.5 * (mean_polyline_distance(a, b) + mean_polyline_distance(b, a));
}

double mask_iou(const std::vector<Pixel>& a, const std::vector<Pixel>& b) {
  if (a.empty() && b.empty()) return 0.0;
  return jaccard(a, b);
}

Grounding ground_gold(const InterpretationModel& model, const Assignment& gold,
                      const PrimitiveSet& prims, const GroundingParams& params) {
  // (cost, component, candidate); lower cost is a better match.
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  std::vector<double> quality_of;
  Grounding out;
  for (std::size_t c = 0; c < model.components.size(); ++c) {
    const auto& spec = model.components[c];
    out.assignment[spec.name] = std::nullopt;
    const auto it = gold.find(spec.name);
    if (it == gold.end() || !it->second) continue;
    const Primitive& g = *it->second;
    if (kind_of(g) != spec.kind) {
      throw Error(ErrorCode::kKindMismatch, "gold for " + spec.name + " has the wrong kind");
    }
    for (std::size_t i = 0; i < prims.count(spec.kind); ++i) {
      switch (spec.kind) {
        case PrimitiveKind::kRegion: {
          const double iou = mask_iou(std::get<Region>(g).mask, prims.regions[i].mask);
          if (iou >= params.min_region_iou) pairs.emplace_back(1.0 - iou, c, i);
          break;
        }
        case PrimitiveKind::kContour: {
          const auto& gp = std::get<Contour>(g).points;
          const auto& ep = prims.contours[i].points;
          // Symmetric, so a contour that also runs far past the gold does
          // not count as a match.
          const double d = contour_distance(gp, ep);
          if (d <= params.max_contour_distance) pairs.emplace_back(d, c, i);
          break;
        }
        case PrimitiveKind::kPoint: {
          const auto a = std::get<PointFeature>(g).position;
          const auto b = prims.points[i].position;
          const double d = std::hypot(a.x - b.x, a.y - b.y);
          if (d <= params.max_point_distance) pairs.emplace_back(d, c, i);
          break;
        }
      }
    }
    out.unmatched.push_back(spec.name);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> done(model.components.size(), false);
  std::map<std::pair<PrimitiveKind, std::size_t>, bool> used;
  for (const auto& [cost, c, i] : pairs) {
    const auto& spec = model.components[c];
    if (done[c] || used[{spec.kind, i}]) continue;
    done[c] = true;
    used[{spec.kind, i}] = true;
    out.assignment[spec.name] = prims.get(spec.kind, i);
    out.source[spec.name] = i;
    if (spec.kind == PrimitiveKind::kRegion) {
      out.quality[spec.name] = 1.0 - cost;
    } else {
      out.quality[spec.name] = cost;
    }
    std::erase(out.unmatched, spec.name);
  }
  return out;
}

Assignment PreparedExample::evaluation_gold() const {
  Assignment out = grounding.assignment;
  for (const auto& name : grounding.unmatched) out[name] = gold.at(name);
  return out;
}

PreparedExample prepare_example(const InterpretationModel& model, const TrainingExample& ex,
                                const TrainConfig& config) {
  PreparedExample out;
  out.prims = extract_primitives(ex.image, config.extraction);
  out.gold = ex.gold;
  out.positive = ex.positive;
  out.grounding = ground_gold(model, ex.gold, out.prims, config.grounding);
  return out;
}

std::optional<SearchResult> predict(const InterpretationModel& model, const PreparedExample& ex,
                                    const SearchConfig& search) {
  try {
    const auto table = build_candidates(model, ex.prims, search.max_candidates);
    return interpret(model, table, search);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUninterpretable) return std::nullopt;
    throw;
  }
}

bool exact_match(const InterpretationModel& model, const PreparedExample& ex,
                 const SearchConfig& search) {
  const auto pred = predict(model, ex, search);
  return pred && pred->interpretation.assignment == ex.grounding.assignment;
}

namespace {

// Argmax of score + margin * (number of components differing from gold).
std::optional<SearchResult> predict_augmented(const InterpretationModel& model,
                                              const PreparedExample& ex, const TrainConfig& config) {
  try {
    auto table = build_candidates(model, ex.prims, config.search.max_candidates);
    for (std::size_t c = 0; c < model.components.size(); ++c) {
      const auto& gold = ex.grounding.assignment.at(model.components[c].name);
      for (auto& cand : table.lists[c]) cand.loss = cand.primitive == gold ? 0.0 : config.margin;
    }
    return interpret(model, table, config.search);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUninterpretable) return std::nullopt;
    throw;
  }
}

}  // namespace

InterpretationModel train_structured(const InterpretationModel& model,
                                     const std::vector<PreparedExample>& examples,
                                     const TrainConfig& config, TrainStats* stats,
                                     std::vector<UpdateTrace>* trace) {
  std::vector<const PreparedExample*> pool;
  std::size_t skipped = 0;
  for (const auto& ex : examples) {
    if (!ex.positive) continue;
    if (ex.grounding.complete()) {
      pool.push_back(&ex);
    } else {
      ++skipped;
    }
  }
  if (pool.empty()) {
    throw Error(ErrorCode::kNoGroundedPositives, "no positive example with fully grounded gold");
  }
  TrainStats local;
  local.examples_used = pool.size();
  local.examples_skipped = skipped;

  InterpretationModel current = model;
  std::fill(current.weights.begin(), current.weights.end(), 0.0);
  const auto dims = current.feature_dims();
  current.weights.resize(dims, 0.0);
  std::vector<double> sum(dims, 0.0);
  std::size_t steps = 0;
  InterpretationModel result = current;

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::optional<Rng> rng;
  if (config.shuffle_seed) rng.emplace(*config.shuffle_seed);

  auto averaged = [&] {
    InterpretationModel m = current;
    if (config.averaging && steps > 0) {
      for (std::size_t k = 0; k < dims; ++k) m.weights[k] = sum[k] / static_cast<double>(steps);
    }
    return m;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (rng) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng->uniform_int(0, static_cast<int>(i) - 1))]);
      }
    }
    for (const auto idx : order) {
      const auto& ex = *pool[idx];
      const ImageDims img{ex.prims.width, ex.prims.height};
      const auto pred = config.margin > 0.0 ? predict_augmented(current, ex, config)
                                            : predict(current, ex, config.search);
      const auto gold_phi = feature_vector(current, ex.grounding.assignment, img);
      // An uninterpretable prediction cannot happen for a grounded positive:
      // its gold primitives are candidates of every component.
      if (pred && pred->interpretation.features != gold_phi) {
        const auto& pred_phi = pred->interpretation.features;
        UpdateTrace t;
        if (trace) {
          t.gap_before = linear_score(current, gold_phi, ex.grounding.assignment) -
                         linear_score(current, pred_phi, pred->interpretation.assignment);
        }
        for (std::size_t k = 0; k < dims; ++k) {
          const double d = gold_phi[k] - pred_phi[k];
          current.weights[k] += config.learning_rate * d;
          t.step_norm2 += d * d;
        }
        ++local.updates;
        if (trace) {
          t.gap_after = linear_score(current, gold_phi, ex.grounding.assignment) -
                        linear_score(current, pred_phi, pred->interpretation.assignment);
          trace->push_back(t);
        }
      }
      for (std::size_t k = 0; k < dims; ++k) sum[k] += current.weights[k];
      ++steps;
    }
    result = averaged();
    local.epochs_run = epoch + 1;
    std::size_t hits = 0;
    for (const auto* ex : pool) hits += exact_match(result, *ex, config.search) ? 1 : 0;
    local.exact_match.push_back(static_cast<double>(hits) / static_cast<double>(pool.size()));
    if (hits == pool.size()) break;
  }
  if (stats) *stats = local;
  return result;
}

double calibrate_threshold(const InterpretationModel& model,
                           const std::vector<PreparedExample>& examples,
                           const SearchConfig& search) {
  double pos = 0.0, neg = 0.0;
  std::size_t np = 0, nn = 0;
  for (const auto& ex : examples) {
    const auto pred = predict(model, ex, search);
    if (!pred) continue;
    if (ex.positive) {
      pos += pred->interpretation.score;
      ++np;
    } else {
      neg += pred->interpretation.score;
      ++nn;
    }
  }
  if (np == 0 || nn == 0) {
    throw Error(ErrorCode::kInvalidArgument, "calibration needs interpretable examples of both classes");
  }
  return 0.5 * (pos / static_cast<double>(np) + neg / static_cast<double>(nn));
}

std::string_view to_string(AblationMetric m) {
  return m == AblationMetric::kInterpretationJaccard ? "interpretation_jaccard"
                                                     : "classification_accuracy";
}

std::string relation_name(const RelationSpec& rel) {
  std::string s(to_string(rel.kind));
  s += '(';
  for (std::size_t i = 0; i < rel.operands.size(); ++i) {
    if (i) s += ',';
    s += rel.operands[i];
  }
  return s + ')';
}

SetMetrics evaluate_set(const InterpretationModel& model,
                        const std::vector<PreparedExample>& examples, const SearchConfig& search) {
  SetMetrics m;
  Classification cls;
  double jsum = 0.0;
  for (const auto& ex : examples) {
    const auto pred = predict(model, ex, search);
    cls.add(pred && pred->interpretation.score >= model.threshold, ex.positive);
    if (!ex.positive) continue;
    const Assignment empty;
    const auto r = jaccard_correspondence(pred ? pred->interpretation.assignment : empty,
                                          ex.evaluation_gold(), {ex.prims.width, ex.prims.height});
    jsum += r.mean_jaccard;
    ++m.jaccard_count;
  }
  m.accuracy = cls.accuracy();
  m.mean_jaccard = m.jaccard_count ? jsum / static_cast<double>(m.jaccard_count) : 0.0;
  return m;
}

std::vector<AblationEntry> ablate_feature(const InterpretationModel& model,
                                          const std::vector<PreparedExample>& eval_set,
                                          std::size_t relation, const AblationConfig& config) {
  if (relation >= model.relations.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "relation index " + std::to_string(relation) +
                                                 " out of range (model has " +
                                                 std::to_string(model.relations.size()) + ")");
  }
  InterpretationModel ablated = with_zeroed_block(model, relation);
  if (config.retrain) {
    if (!config.training) throw Error(ErrorCode::kInvalidArgument, "retraining needs a training set");
    InterpretationModel reduced = model;
    reduced.relations.erase(reduced.relations.begin() + static_cast<std::ptrdiff_t>(relation));
    reduced.weights.assign(reduced.feature_dims(), 0.0);
    const auto trained = train_structured(reduced, *config.training, config.train);
    const auto offsets = model.block_offsets();
    const auto dims = relation_dims(model.relations[relation].kind);
    std::size_t k = 0;
    for (std::size_t i = 0; i < ablated.weights.size(); ++i) {
      const bool inside = i >= offsets[relation] && i < offsets[relation] + dims;
      ablated.weights[i] = inside ? 0.0 : trained.weights[k++];
    }
  }
  if (config.calibration) ablated.threshold = calibrate_threshold(ablated, *config.calibration, config.search);

  const auto base = evaluate_set(model, eval_set, config.search);
  const auto abl = evaluate_set(ablated, eval_set, config.search);
  const auto name = relation_name(model.relations[relation]);
  return {
      {relation, name, AblationMetric::kInterpretationJaccard, base.mean_jaccard, abl.mean_jaccard,
       base.mean_jaccard - abl.mean_jaccard},
      {relation, name, AblationMetric::kClassificationAccuracy, base.accuracy, abl.accuracy,
       base.accuracy - abl.accuracy},
  };
}

std::string ablation_csv(const AblationReport& report) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed;
  os << "relation,metric,baseline,ablated,delta\n";
  for (const auto& e : report.entries) {
    os << '"' << e.relation_name << "\"," << to_string(e.metric) << ',' << e.baseline << ','
       << e.ablated << ',' << e.delta << '\n';
  }
  return os.str();
}

RecognitionDrop recognition_drop(const InterpretationModel& model, const Image& minimal,
                                 const Image& subminimal, const SearchConfig& search,
                                 const ExtractionParams& extraction) {
  auto run = [&](const Image& img) -> std::optional<SearchResult> {
    PreparedExample ex;
    ex.prims = extract_primitives(img, extraction);
    return predict(model, ex, search);
  };
  const auto a = run(minimal);
  const auto b = run(subminimal);
  RecognitionDrop out;
  out.min_uninterpretable = !a;
  out.sub_uninterpretable = !b;
  out.score_min = a ? a->interpretation.score : RecognitionDrop::kUninterpretable;
  out.score_sub = b ? b->interpretation.score : RecognitionDrop::kUninterpretable;
  if (!a || !b) {
    out.drop = a ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.drop = out.score_min - out.score_sub;
  const auto offsets = model.block_offsets();
  const auto& fa = a->interpretation.features;
  const auto& fb = b->interpretation.features;
  for (std::size_t r = 0; r < model.relations.size(); ++r) {
    std::vector<double> diff;
    double att = 0.0;
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
      diff.push_back(fa[k] - fb[k]);
      att += model.weights[k] * (fa[k] - fb[k]);
    }
    out.feature_difference.push_back(std::move(diff));
    out.attribution.push_back(att);
  }
  const double wa = dot(model.weights, fa);
  const double wb = dot(model.weights, fb);
  out.penalty_difference = (wb - out.score_sub) - (wa - out.score_min);
  return out;
}

}  // namespace mirc
