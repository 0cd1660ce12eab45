#include "doctest.h"
#include "mirc/error.hpp"
#include "mirc/learning.hpp"
#include "mirc/synthgen.hpp"

using namespace mirc;

namespace {

std::vector<PreparedExample> prepared(std::uint32_t first, int n, bool mixed, const TrainConfig& cfg) {
  const auto structure = hug_model_structure();
  std::vector<PreparedExample> out;
  for (int i = 0; i < n; ++i) {
    const auto seed = first + static_cast<std::uint32_t>(i);
    const bool pos = !mixed || i % 2 == 0;
    const auto g = generate(seed, pos ? Label::kPositive : Label::kNegative);
    out.push_back(prepare_example(structure, {g.image, g.gold, pos}, cfg));
  }
  return out;
}

}  // namespace

TEST_CASE("perceptron: every update raises the gold-vs-prediction gap by lr * |dphi|^2") {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.5;
  const auto exs = prepared(100, 8, false, cfg);
  std::vector<UpdateTrace> trace;
  TrainStats stats;
  train_structured(hug_model_structure(), exs, cfg, &stats, &trace);
  REQUIRE(!trace.empty());
  CHECK(trace.size() == stats.updates);
  for (const auto& t : trace) {
    CHECK(t.step_norm2 > 0.0);
    CHECK(t.gap_after - t.gap_before == doctest::Approx(cfg.learning_rate * t.step_norm2));
  }
}

TEST_CASE("perceptron: one example, one epoch, no averaging is a single step from zero") {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.averaging = false;
  cfg.learning_rate = 2.0;
  auto exs = prepared(7, 1, false, cfg);
  REQUIRE(exs[0].grounding.complete());
  const auto zero = hug_model_structure();
  const auto first = predict(zero, exs[0], cfg.search);
  REQUIRE(first);
  const ImageDims dims{exs[0].prims.width, exs[0].prims.height};
  const auto gold_phi = feature_vector(zero, exs[0].grounding.assignment, dims);
  const auto m = train_structured(zero, exs, cfg);
  REQUIRE(m.weights.size() == gold_phi.size());
  for (std::size_t k = 0; k < gold_phi.size(); ++k)
    CHECK(m.weights[k] == doctest::Approx(2.0 * (gold_phi[k] - first->interpretation.features[k])));
}

TEST_CASE("training needs grounded positives") {
  TrainConfig cfg;
  auto exs = prepared(1, 2, true, cfg);
  for (auto& e : exs) e.positive = false;
  try {
    train_structured(hug_model_structure(), exs, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoGroundedPositives);
  }
}

TEST_CASE("grounding matches generated gold on positives") {
  TrainConfig cfg;
  const auto exs = prepared(200, 10, false, cfg);
  int complete = 0;
  for (const auto& e : exs) complete += e.grounding.complete();
  CHECK(complete >= 8);
}

TEST_CASE("calibrated threshold is the midpoint of the class means") {
  TrainConfig cfg;
  cfg.epochs = 3;
  const auto exs = prepared(300, 12, true, cfg);
  const auto m = train_structured(hug_model_structure(), exs, cfg);
  double pos = 0, neg = 0;
  int np = 0, nn = 0;
  for (const auto& e : exs) {
    const auto p = predict(m, e, cfg.search);
    if (!p) continue;
    (e.positive ? pos : neg) += p->interpretation.score;
    ++(e.positive ? np : nn);
  }
  REQUIRE(np > 0);
  REQUIRE(nn > 0);
  CHECK(calibrate_threshold(m, exs, cfg.search) == doctest::Approx(0.5 * (pos / np + neg / nn)));
}

TEST_CASE("training is deterministic") {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.shuffle_seed = 5;
  const auto exs = prepared(400, 6, false, cfg);
  CHECK(train_structured(hug_model_structure(), exs, cfg) == train_structured(hug_model_structure(), exs, cfg));
}

TEST_CASE("ablation zeroes one block and reports both metrics") {
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto exs = prepared(500, 8, true, cfg);
  auto m = train_structured(hug_model_structure(), exs, cfg);
  m.threshold = calibrate_threshold(m, exs, cfg.search);
  AblationConfig ac;
  const auto entries = ablate_feature(m, exs, 10, ac);
  REQUIRE(entries.size() == 2);
  const auto base = evaluate_set(m, exs, cfg.search);
  const auto zeroed = evaluate_set(with_zeroed_block(m, 10), exs, cfg.search);
  for (const auto& e : entries) {
    CHECK(e.relation == 10);
    CHECK(e.delta == doctest::Approx(e.baseline - e.ablated));
    if (e.metric == AblationMetric::kClassificationAccuracy) {
      CHECK(e.baseline == doctest::Approx(base.accuracy));
      CHECK(e.ablated == doctest::Approx(zeroed.accuracy));
    } else {
      CHECK(e.baseline == doctest::Approx(base.mean_jaccard));
      CHECK(e.ablated == doctest::Approx(zeroed.mean_jaccard));
    }
  }
  CHECK(relation_name(m.relations[10]) == "touch(palm-region,torso-region-2)");
}

TEST_CASE("recognition drop decomposes into attributions and the penalty difference") {
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto exs = prepared(600, 8, true, cfg);
  const auto m = train_structured(hug_model_structure(), exs, cfg);
  const auto g = generate(601, Label::kPositive);
  const auto sub = reduce(g.image, {ReductionKind::kCropTopLeft, 0.8});
  const auto d = recognition_drop(m, g.image, sub);
  if (!d.min_uninterpretable && !d.sub_uninterpretable) {
    double total = d.penalty_difference;
    for (double a : d.attribution) total += a;
    CHECK(d.drop == doctest::Approx(d.score_min - d.score_sub));
    CHECK(total == doctest::Approx(d.drop));
  }
  CHECK(d.attribution.size() == m.relations.size());
}
