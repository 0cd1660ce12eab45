#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "mirc/model.hpp"

namespace mirc {

struct Candidate {
  /// Absent for the null candidate of an optional component.
  std::optional<Primitive> primitive;
  /// Index of the primitive in its kind's extraction list; identifies it for
  /// the one-primitive-one-component rule.
  std::size_t source = 0;
  double prescore = 0.0;
  /// Additive term used only by loss-augmented training; zero otherwise.
  double loss = 0.0;
};

/// Candidate lists aligned with model.components.
struct CandidateTable {
  std::vector<std::vector<Candidate>> lists;
  ImageDims dims;

  /// Size of the full product space (saturating).
  std::size_t product_size() const;
};

struct SearchConfig {
  std::size_t max_candidates = 8;  // K
  std::size_t beam_width = 50;
  std::size_t exact_limit = 1'000'000;
};

inline constexpr std::size_t kUnboundedBeam = std::numeric_limits<std::size_t>::max();

/// Sum of the component's unary relation contributions for one primitive.
double unary_prescore(const InterpretationModel& model, std::size_t component,
                      const Primitive& prim, ImageDims dims);

/// Throws Error(kUninterpretable) when a required component has no
/// kind-matched primitive.
CandidateTable build_candidates(const InterpretationModel& model, const PrimitiveSet& prims,
                                std::size_t max_candidates);

/// Chosen candidate index per component.
using Choice = std::vector<std::size_t>;

struct SearchResult {
  Interpretation interpretation;
  Choice choice;
};

/// True argmax over the product space (ties: lexicographically smallest
/// candidate indices). Throws Error(kUseBeam) above exact_limit.
SearchResult interpret_exact(const InterpretationModel& model, const CandidateTable& table,
                             std::size_t exact_limit = 1'000'000);

/// Nested beam search: the width-w beam at every depth is a prefix of the
/// width-(w+1) beam, so the result can only improve as the width grows.
SearchResult interpret_beam(const InterpretationModel& model, const CandidateTable& table,
                            std::size_t beam_width);

/// Exact when the product space fits exact_limit, beam otherwise.
SearchResult interpret(const InterpretationModel& model, const CandidateTable& table,
                       const SearchConfig& config);

Assignment assignment_from_choice(const InterpretationModel& model, const CandidateTable& table,
                                  const Choice& choice);

}  // namespace mirc
