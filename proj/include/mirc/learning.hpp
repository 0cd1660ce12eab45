#pragma once

#include <cstdint>
#include <map>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mirc/image.hpp"
#include "mirc/model.hpp"
#include "mirc/search.hpp"

namespace mirc {

struct GroundingParams {
  double min_region_iou = 0.3;
  double max_contour_distance = 3.0;
  double max_point_distance = 3.0;
};

/// Gold annotation mapped onto extracted primitives.
struct Grounding {
  Assignment assignment;
  /// Index of the matched primitive within its kind's list.
  std::map<std::string, std::size_t> source;
  std::vector<std::string> unmatched;  // gold present but no extracted match
  /// Match quality per matched component: IoU for regions, distance otherwise.
  std::map<std::string, double> quality;
  bool complete() const { return unmatched.empty(); }
};

/// Mean distance from the points of `from` to the polyline `to`.
double mean_polyline_distance(const std::vector<Vec2>& from, const std::vector<Vec2>& to);
/// Mean of the two directed mean distances.
double contour_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
double mask_iou(const std::vector<Pixel>& a, const std::vector<Pixel>& b);

/// Matches each gold component to an extracted primitive of the same kind.
/// Pairs are taken best-first over all components, and each extracted
/// primitive is used at most once.
Grounding ground_gold(const InterpretationModel& model, const Assignment& gold,
                      const PrimitiveSet& prims, const GroundingParams& params = {});

struct TrainingExample {
  Image image;
  Assignment gold;
  bool positive = true;
};

struct TrainConfig {
  int epochs = 20;
  bool averaging = true;
  double learning_rate = 1.0;
  SearchConfig search;
  ExtractionParams extraction;
  GroundingParams grounding;
  /// Shuffle the example order each epoch with this seed (off when empty).
  std::optional<std::uint32_t> shuffle_seed;
  /// Loss-augmented updates: every component filled differently from gold
  /// adds this much to a competitor's score during training (0 = plain
  /// perceptron).
  double margin = 0.0;
};

/// Extracted primitives and grounded gold for one example. Candidate tables
/// depend on the weights, so they are rebuilt per prediction.
struct PreparedExample {
  PrimitiveSet prims;
  Assignment gold;  // raw annotation
  Grounding grounding;
  bool positive = true;
  /// Grounded gold with raw geometry standing in for unmatched components;
  /// the reference for Jaccard evaluation.
  Assignment evaluation_gold() const;
};

/// Interpretation of a prepared example, or nullopt when uninterpretable.
std::optional<SearchResult> predict(const InterpretationModel& model, const PreparedExample& ex,
                                    const SearchConfig& search);

PreparedExample prepare_example(const InterpretationModel& model, const TrainingExample& ex,
                                const TrainConfig& config);

struct TrainStats {
  int epochs_run = 0;
  std::size_t examples_used = 0;     // grounded positives
  std::size_t examples_skipped = 0;  // positives without complete grounding
  std::size_t updates = 0;
  /// Fraction of training positives whose prediction equals the grounded
  /// gold after each epoch (evaluated with that epoch's returned weights).
  std::vector<double> exact_match;
};

/// Callback invoked after every update with the pre-update score gap on
/// that example; used by tests of the perceptron step identity.
struct UpdateTrace {
  double gap_before = 0.0;  // score(gold) - score(pred) under old weights
  double gap_after = 0.0;   // same under new weights
  double step_norm2 = 0.0;  // |phi(gold) - phi(pred)|^2
};

/// Averaged structured perceptron over the positive examples. Stops early
/// once an epoch ends with every grounded positive matched exactly.
InterpretationModel train_structured(const InterpretationModel& model,
                                     const std::vector<PreparedExample>& examples,
                                     const TrainConfig& config, TrainStats* stats = nullptr,
                                     std::vector<UpdateTrace>* trace = nullptr);

/// Whether the model's prediction on a prepared example equals its gold.
bool exact_match(const InterpretationModel& model, const PreparedExample& ex,
                 const SearchConfig& search);


/// Threshold at the midpoint of the positive and negative mean scores.
/// Uninterpretable examples are left out of the means.
double calibrate_threshold(const InterpretationModel& model,
                           const std::vector<PreparedExample>& examples,
                           const SearchConfig& search);

enum class AblationMetric { kInterpretationJaccard, kClassificationAccuracy };
std::string_view to_string(AblationMetric m);

struct AblationEntry {
  std::size_t relation = 0;
  std::string relation_name;
  AblationMetric metric = AblationMetric::kClassificationAccuracy;
  double baseline = 0.0;
  double ablated = 0.0;
  double delta = 0.0;  // baseline - ablated
};

struct AblationReport {
  std::vector<AblationEntry> entries;
};

struct AblationConfig {
  SearchConfig search;
  /// Retrain without the relation instead of only zeroing its weights.
  bool retrain = false;
  TrainConfig train;
  /// Recalibrate the threshold on these examples after zeroing or
  /// retraining; the original threshold is kept when empty.
  const std::vector<PreparedExample>* calibration = nullptr;
  const std::vector<PreparedExample>* training = nullptr;  // for retrain
};

/// Human-readable relation id, e.g. "touch(palm-region,torso-region-2)".
std::string relation_name(const RelationSpec& rel);

/// Both metrics with the given relation's weights zeroed.
std::vector<AblationEntry> ablate_feature(const InterpretationModel& model,
                                          const std::vector<PreparedExample>& eval_set,
                                          std::size_t relation, const AblationConfig& config);

/// Classification accuracy and mean Jaccard of a model on prepared examples.
struct SetMetrics {
  double accuracy = 0.0;
  double mean_jaccard = 0.0;
  std::size_t jaccard_count = 0;
};
SetMetrics evaluate_set(const InterpretationModel& model,
                        const std::vector<PreparedExample>& examples, const SearchConfig& search);

std::string ablation_csv(const AblationReport& report);

struct RecognitionDrop {
  static constexpr double kUninterpretable = -std::numeric_limits<double>::infinity();
  double score_min = 0.0;
  double score_sub = 0.0;
  double drop = 0.0;
  bool min_uninterpretable = false;
  bool sub_uninterpretable = false;
  /// phi(min) - phi(sub) per relation block.
  std::vector<std::vector<double>> feature_difference;
  /// w_block . (phi(min) - phi(sub)) per relation.
  std::vector<double> attribution;
  /// Null-penalty part of the drop: penalty(sub) - penalty(min).
  double penalty_difference = 0.0;
};

RecognitionDrop recognition_drop(const InterpretationModel& model, const Image& minimal,
                                 const Image& subminimal, const SearchConfig& search = {},
                                 const ExtractionParams& extraction = {});

}  // namespace mirc
