#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirc/primitives.hpp"
#include "mirc/relations.hpp"

namespace mirc {

struct ComponentSpec {
  std::string name;
  PrimitiveKind kind = PrimitiveKind::kRegion;
  bool optional = false;
  friend bool operator==(const ComponentSpec&, const ComponentSpec&) = default;
};

struct RelationSpec {
  RelationKind kind = RelationKind::kExists;
  std::vector<std::string> operands;
  RelationParams params;
  friend bool operator==(const RelationSpec&, const RelationSpec&) = default;
};

/// The learned structure of one minimal configuration.
struct InterpretationModel {
  static constexpr int kFormatVersion = 1;

  std::string class_label;
  std::vector<ComponentSpec> components;
  std::vector<RelationSpec> relations;
  std::vector<double> weights;
  std::map<std::string, double> null_penalties;  // optional components only
  /// Recognizability threshold on the score; calibrated after training.
  double threshold = 0.0;
  /// Window size the model interprets (scan uses it as the sliding window).
  int native_width = 30;
  int native_height = 30;

  std::optional<std::size_t> component_index(const std::string& name) const;
  std::size_t feature_dims() const;
  /// Start offset of each relation's weight block; back() == feature_dims().
  std::vector<std::size_t> block_offsets() const;
  double null_penalty(const std::string& name) const;

  friend bool operator==(const InterpretationModel&, const InterpretationModel&) = default;
};

/// Component name -> assigned primitive, or nullopt for an absent component.
/// Components missing from the map count as null.
using Assignment = std::map<std::string, std::optional<Primitive>>;

struct Interpretation {
  Assignment assignment;
  double score = 0.0;
  std::vector<double> features;
};

/// Every violated model invariant; empty means the model is well formed.
std::vector<std::string> validate_model(const InterpretationModel& model);

std::vector<double> feature_vector(const InterpretationModel& model, const Assignment& assignment,
                                   ImageDims dims);

/// weights . features minus the null penalties of nulled optional components.
double linear_score(const InterpretationModel& model, const std::vector<double>& features,
                    const Assignment& assignment);

Interpretation score(const InterpretationModel& model, const Assignment& assignment,
                     ImageDims dims);

/// Copy of the model with one relation's weight block set to zero.
InterpretationModel with_zeroed_block(const InterpretationModel& model, std::size_t relation);

/// Structure of the shipped "hug" configuration (weights zero, untrained).
InterpretationModel hug_model_structure();

std::string model_to_json(const InterpretationModel& model);
InterpretationModel model_from_json(const std::string& text);
InterpretationModel load_model(const std::string& path);
void save_model(const InterpretationModel& model, const std::string& path);

}  // namespace mirc
