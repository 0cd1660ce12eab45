#include "mirc/search.hpp"

#include <algorithm>
#include <queue>

#include "mirc/error.hpp"

namespace mirc {

std::size_t CandidateTable::product_size() const {
  std::size_t n = 1;
  for (const auto& l : lists) {
    if (l.empty()) return 0;
    if (n > std::numeric_limits<std::size_t>::max() / l.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    n *= l.size();
  }
  return n;
}

namespace {

double dot_block(const InterpretationModel& model, std::size_t offset, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += model.weights[offset + k] * v[k];
  return s;
}

std::vector<std::size_t> operand_components(const InterpretationModel& model, const RelationSpec& rel) {
  std::vector<std::size_t> out;
  for (const auto& name : rel.operands) {
    const auto idx = model.component_index(name);
    if (!idx) throw Error(ErrorCode::kUnknownComponent, "unknown component: " + name);
    out.push_back(*idx);
  }
  return out;
}

}  // namespace

double unary_prescore(const InterpretationModel& model, std::size_t component,
                      const Primitive& prim, ImageDims dims) {
  const auto offsets = model.block_offsets();
  const Geometry g(prim);
  double s = 0.0;
  for (std::size_t r = 0; r < model.relations.size(); ++r) {
    const auto& rel = model.relations[r];
    const auto ops = operand_components(model, rel);
    if (!std::all_of(ops.begin(), ops.end(), [&](std::size_t c) { return c == component; })) continue;
    const auto v = evaluate_relation(rel.kind, rel.params, &g, ops.size() > 1 ? &g : nullptr, dims);
    s += dot_block(model, offsets[r], v);
  }
  return s;
}

CandidateTable build_candidates(const InterpretationModel& model, const PrimitiveSet& prims,
                                std::size_t max_candidates) {
  if (max_candidates < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  CandidateTable table;
  table.dims = {prims.width, prims.height};
  for (std::size_t c = 0; c < model.components.size(); ++c) {
    const auto& spec = model.components[c];
    const auto n = prims.count(spec.kind);
    if (n == 0 && !spec.optional) {
      throw Error(ErrorCode::kUninterpretable,
                  "uninterpretable region: no " + std::string(to_string(spec.kind)) +
                      " candidates for " + spec.name);
    }
    std::vector<Candidate> list;
    list.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      auto prim = prims.get(spec.kind, i);
      const double pre = unary_prescore(model, c, prim, table.dims);
      list.push_back({std::move(prim), i, pre});
    }
    // stable: ties keep extraction order
    std::stable_sort(list.begin(), list.end(),
                     [](const Candidate& a, const Candidate& b) { return a.prescore > b.prescore; });
    if (list.size() > max_candidates) list.resize(max_candidates);
    if (spec.optional) list.push_back({std::nullopt, 0, -model.null_penalty(spec.name)});
    table.lists.push_back(std::move(list));
  }
  return table;
}

namespace {

/// Per-relation contribution tables over candidate indices.
class ScoreCache {
 public:
  ScoreCache(const InterpretationModel& model, const CandidateTable& table)
      : model_(model), table_(table) {
    if (table.lists.size() != model.components.size()) {
      throw Error(ErrorCode::kInvalidArgument, "candidate table does not match model");
    }
    if (model.weights.size() != model.feature_dims()) {
      throw Error(ErrorCode::kInvalidModel, "weight dimension mismatch");
    }
    geoms_.resize(table.lists.size());
    for (std::size_t c = 0; c < table.lists.size(); ++c) {
      for (const auto& cand : table.lists[c]) {
        if (cand.primitive && kind_of(*cand.primitive) != model.components[c].kind) {
          throw Error(ErrorCode::kKindMismatch, "candidate kind mismatch");
        }
        geoms_[c].push_back(cand.primitive ? std::optional<Geometry>(*cand.primitive) : std::nullopt);
      }
    }
    const auto offsets = model.block_offsets();
    completes_at_.resize(table.lists.size());
    for (std::size_t r = 0; r < model.relations.size(); ++r) {
      const auto& rel = model.relations[r];
      Entry e;
      e.ops = operand_components(model, rel);
      const std::size_t a = e.ops[0];
      const std::size_t b = e.ops.size() > 1 ? e.ops[1] : a;
      e.binary = e.ops.size() > 1 && a != b;
      const auto na = table.lists[a].size();
      const auto nb = e.binary ? table.lists[b].size() : 1;
      e.stride = nb;
      e.contrib.resize(na * nb);
      for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
          const Geometry* ga = geoms_[a][i] ? &*geoms_[a][i] : nullptr;
          const Geometry* gb = nullptr;
          if (e.ops.size() > 1) gb = e.binary ? (geoms_[b][j] ? &*geoms_[b][j] : nullptr) : ga;
          const auto v = evaluate_relation(rel.kind, rel.params, ga, gb, table.dims);
          e.contrib[i * nb + j] = dot_block(model, offsets[r], v);
        }
      }
      completes_at_[std::max(a, b)].push_back(entries_.size());
      entries_.push_back(std::move(e));
    }
  }

  std::size_t depth() const { return table_.lists.size(); }
  std::size_t width(std::size_t c) const { return table_.lists[c].size(); }

  /// Score gained by assigning candidate i to component d given choices for
  /// components < d. Summation order is fixed so every solver agrees.
  double gain(std::size_t d, std::size_t i, const Choice& prefix) const {
    double s = 0.0;
    for (auto r : completes_at_[d]) {
      const auto& e = entries_[r];
      const std::size_t ia = e.ops[0] == d ? i : prefix[e.ops[0]];
      std::size_t jb = 0;
      if (e.binary) jb = e.ops[1] == d ? i : prefix[e.ops[1]];
      s += e.contrib[ia * e.stride + jb];
    }
    const auto& cand = table_.lists[d][i];
    s += cand.loss;
    if (!cand.primitive && model_.components[d].optional) {
      s -= model_.null_penalty(model_.components[d].name);
    }
    return s;
  }

  /// A primitive may fill at most one component.
  bool allowed(std::size_t d, std::size_t i, const Choice& prefix) const {
    const auto& cand = table_.lists[d][i];
    if (!cand.primitive) return true;
    const auto kind = model_.components[d].kind;
    for (std::size_t c = 0; c < d; ++c) {
      const auto& other = table_.lists[c][prefix[c]];
      if (other.primitive && model_.components[c].kind == kind && other.source == cand.source) {
        return false;
      }
    }
    return true;
  }

 private:
  struct Entry {
    std::vector<std::size_t> ops;
    bool binary = false;
    std::size_t stride = 1;
    std::vector<double> contrib;
  };

  const InterpretationModel& model_;
  const CandidateTable& table_;
  std::vector<std::vector<std::optional<Geometry>>> geoms_;
  std::vector<Entry> entries_;
  std::vector<std::vector<std::size_t>> completes_at_;
};

struct State {
  Choice choice;
  double score = 0.0;
};

// Higher score first; lexicographically smaller choice breaks ties.
bool better(const State& a, const State& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.choice < b.choice;
}

SearchResult finish(const InterpretationModel& model, const CandidateTable& table, Choice choice) {
  SearchResult out;
  out.interpretation = score(model, assignment_from_choice(model, table, choice), table.dims);
  out.choice = std::move(choice);
  return out;
}

}  // namespace

Assignment assignment_from_choice(const InterpretationModel& model, const CandidateTable& table,
                                  const Choice& choice) {
  Assignment a;
  for (std::size_t c = 0; c < model.components.size(); ++c) {
    a[model.components[c].name] = table.lists.at(c).at(choice.at(c)).primitive;
  }
  return a;
}

SearchResult interpret_exact(const InterpretationModel& model, const CandidateTable& table,
                             std::size_t exact_limit) {
  const auto product = table.product_size();
  if (product > exact_limit) {
    throw Error(ErrorCode::kUseBeam, "product space " + std::to_string(product) +
                                         " exceeds exact limit; use beam");
  }
  const ScoreCache cache(model, table);
  const auto depth = cache.depth();
  std::optional<State> best;
  Choice prefix(depth, 0);
  // Depth-first in lexicographic order; only a strictly better score
  // replaces the incumbent.
  auto dfs = [&](auto&& self, std::size_t d, double acc) -> void {
    if (d == depth) {
      if (!best || acc > best->score) best = State{prefix, acc};
      return;
    }
    for (std::size_t i = 0; i < cache.width(d); ++i) {
      if (!cache.allowed(d, i, prefix)) continue;
      prefix[d] = i;
      self(self, d + 1, acc + cache.gain(d, i, prefix));
    }
  };
  dfs(dfs, 0, 0.0);
  if (!best) throw Error(ErrorCode::kUninterpretable, "uninterpretable region: no valid assignment");
  return finish(model, table, best->choice);
}

SearchResult interpret_beam(const InterpretationModel& model, const CandidateTable& table,
                            std::size_t beam_width) {
  if (beam_width < 1) throw Error(ErrorCode::kInvalidArgument, "beam width must be >= 1");
  const ScoreCache cache(model, table);
  const auto depth = cache.depth();
  std::vector<State> beam{State{}};
  auto worse = [](const State& a, const State& b) { return better(b, a); };
  for (std::size_t d = 0; d < depth; ++d) {
    // Rank r of the new beam is the best unchosen child of parents 0..r,
    // which makes narrower beams prefixes of wider ones.
    std::priority_queue<State, std::vector<State>, decltype(worse)> pool(worse);
    std::vector<State> next;
    for (std::size_t r = 0; next.size() < beam_width; ++r) {
      if (r < beam.size()) {
        const auto& parent = beam[r];
        Choice prefix = parent.choice;
        prefix.push_back(0);
        for (std::size_t i = 0; i < cache.width(d); ++i) {
          if (!cache.allowed(d, i, prefix)) continue;
          prefix[d] = i;
          pool.push(State{prefix, parent.score + cache.gain(d, i, prefix)});
        }
      } else if (pool.empty()) {
        break;
      }
      if (!pool.empty()) {
        next.push_back(pool.top());
        pool.pop();
      }
    }
    if (next.empty()) {
      throw Error(ErrorCode::kUninterpretable, "uninterpretable region: no valid assignment");
    }
    beam = std::move(next);
  }
  const auto best = *std::min_element(beam.begin(), beam.end(),
                                      [](const State& a, const State& b) { return better(a, b); });
  return finish(model, table, best.choice);
}

SearchResult interpret(const InterpretationModel& model, const CandidateTable& table,
                       const SearchConfig& config) {
  if (table.product_size() <= config.exact_limit) {
    return interpret_exact(model, table, config.exact_limit);
  }
  return interpret_beam(model, table, config.beam_width);
}

}  // namespace mirc
