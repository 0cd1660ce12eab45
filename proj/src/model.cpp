#include "mirc/model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mirc/error.hpp"

namespace mirc {

std::optional<std::size_t> InterpretationModel::component_index(const std::string& name) const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t InterpretationModel::feature_dims() const {
  std::size_t n = 0;
  for (const auto& r : relations) n += relation_dims(r.kind);
  return n;
}

std::vector<std::size_t> InterpretationModel::block_offsets() const {
  std::vector<std::size_t> out;
  out.reserve(relations.size() + 1);
  std::size_t off = 0;
  for (const auto& r : relations) {
    out.push_back(off);
    off += relation_dims(r.kind);
  }
  out.push_back(off);
  return out;
}

double InterpretationModel::null_penalty(const std::string& name) const {
  auto it = null_penalties.find(name);
  return it == null_penalties.end() ? 0.0 : it->second;
}

std::vector<std::string> validate_model(const InterpretationModel& model) {
  std::vector<std::string> defects;
  std::set<std::string> names;
  for (const auto& c : model.components) {
    if (c.name.empty()) defects.push_back("empty component name");
    if (!names.insert(c.name).second) defects.push_back("duplicate component name: " + c.name);
  }
  std::set<std::string> referenced;
  for (std::size_t r = 0; r < model.relations.size(); ++r) {
    const auto& rel = model.relations[r];
    const std::string where = "relation " + std::to_string(r) + " (" +
                              std::string(to_string(rel.kind)) + ")";
    if (rel.operands.size() != relation_arity(rel.kind)) {
      defects.push_back("arity mismatch: " + where);
    }
    for (std::size_t i = 0; i < rel.operands.size(); ++i) {
      const auto idx = model.component_index(rel.operands[i]);
      if (!idx) {
        defects.push_back("unknown operand: " + rel.operands[i] + " in " + where);
        continue;
      }
      referenced.insert(rel.operands[i]);
      if (!operand_kind_ok(rel.kind, i, model.components[*idx].kind)) {
        defects.push_back("operand kind mismatch: " + rel.operands[i] + " in " + where);
      }
    }
    if (rel.params.tol <= 0.0) defects.push_back("non-positive tolerance in " + where);
  }
  if (model.weights.size() != model.feature_dims()) {
    defects.push_back("weight dimension mismatch: expected " + std::to_string(model.feature_dims()) +
                      ", got " + std::to_string(model.weights.size()));
  }
  for (const auto& c : model.components) {
    if (!referenced.contains(c.name)) defects.push_back("unreferenced component: " + c.name);
  }
  for (const auto& [name, penalty] : model.null_penalties) {
    const auto idx = model.component_index(name);
    if (!idx) {
      defects.push_back("null penalty for unknown component: " + name);
    } else if (!model.components[*idx].optional) {
      defects.push_back("null penalty on required component: " + name);
    }
  }
  return defects;
}

namespace {

void check_assignment(const InterpretationModel& model, const Assignment& assignment) {
  for (const auto& [name, prim] : assignment) {
    const auto idx = model.component_index(name);
    if (!idx) throw Error(ErrorCode::kUnknownComponent, "unknown component: " + name);
    const auto& spec = model.components[*idx];
    if (prim && kind_of(*prim) != spec.kind) {
      throw Error(ErrorCode::kKindMismatch, "kind mismatch for component " + name);
    }
  }
  for (const auto& c : model.components) {
    auto it = assignment.find(c.name);
    const bool null = it == assignment.end() || !it->second;
    if (null && !c.optional) {
      throw Error(ErrorCode::kKindMismatch, "required component is null: " + c.name);
    }
  }
}

const Primitive* lookup(const Assignment& assignment, const std::string& name) {
  auto it = assignment.find(name);
  if (it == assignment.end() || !it->second) return nullptr;
  return &*it->second;
}

}  // namespace

std::vector<double> feature_vector(const InterpretationModel& model, const Assignment& assignment,
                                   ImageDims dims) {
  check_assignment(model, assignment);
  std::vector<double> out;
  out.reserve(model.feature_dims());
  for (const auto& rel : model.relations) {
    std::optional<Geometry> ga, gb;
    if (const auto* p = lookup(assignment, rel.operands.at(0))) ga.emplace(*p);
    if (rel.operands.size() > 1) {
      if (const auto* p = lookup(assignment, rel.operands[1])) gb.emplace(*p);
    }
    const auto v = evaluate_relation(rel.kind, rel.params, ga ? &*ga : nullptr,
                                     gb ? &*gb : nullptr, dims);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

double linear_score(const InterpretationModel& model, const std::vector<double>& features,
                    const Assignment& assignment) {
  if (features.size() != model.weights.size()) {
    throw Error(ErrorCode::kInvalidModel, "weight dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) s += model.weights[i] * features[i];
  for (const auto& c : model.components) {
    if (c.optional && lookup(assignment, c.name) == nullptr) s -= model.null_penalty(c.name);
  }
  return s;
}

Interpretation score(const InterpretationModel& model, const Assignment& assignment,
                     ImageDims dims) {
  Interpretation out;
  out.assignment = assignment;
  for (const auto& c : model.components) out.assignment.try_emplace(c.name, std::nullopt);
  out.features = feature_vector(model, out.assignment, dims);
  out.score = linear_score(model, out.features, out.assignment);
  return out;
}

InterpretationModel with_zeroed_block(const InterpretationModel& model, std::size_t relation) {
  if (relation >= model.relations.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "relation index out of range");
  }
  auto out = model;
  const auto offsets = model.block_offsets();
  for (std::size_t i = offsets[relation]; i < offsets[relation + 1]; ++i) out.weights[i] = 0.0;
  return out;
}

InterpretationModel hug_model_structure() {
  InterpretationModel m;
  m.class_label = "hug";
  // Largest parts first: the beam assigns components in this order.
  m.components = {
      {"torso-region-1", PrimitiveKind::kRegion, false},
      {"torso-region-2", PrimitiveKind::kRegion, false},
      {"back-contour", PrimitiveKind::kContour, false},
      {"arm-contour-1", PrimitiveKind::kContour, false},
      {"arm-contour-2", PrimitiveKind::kContour, false},
      {"palm-region", PrimitiveKind::kRegion, false},
      {"face-region-1", PrimitiveKind::kRegion, true},
      {"face-region-2", PrimitiveKind::kRegion, true},
  };
  const RelationParams contour_scale{2.0, 50.0};
  const RelationParams region_scale{2.0, 0.02};
  m.relations = {
      {RelationKind::kExists, {"torso-region-1"}, region_scale},
      {RelationKind::kShape, {"torso-region-1"}, {}},
      {RelationKind::kShape, {"torso-region-2"}, {}},
      {RelationKind::kRelPos, {"torso-region-1", "torso-region-2"}, {}},
      {RelationKind::kBounds, {"back-contour", "torso-region-2"}, {}},
      {RelationKind::kExists, {"arm-contour-1"}, contour_scale},
      {RelationKind::kExists, {"arm-contour-2"}, contour_scale},
      {RelationKind::kContinuity, {"arm-contour-1", "arm-contour-2"}, {}},
      {RelationKind::kTouch, {"arm-contour-1", "torso-region-1"}, {}},
      {RelationKind::kTouch, {"arm-contour-2", "palm-region"}, {}},
      {RelationKind::kTouch, {"palm-region", "torso-region-2"}, {}},
      {RelationKind::kRelPos, {"palm-region", "torso-region-2"}, {}},
      {RelationKind::kShape, {"palm-region"}, {}},
      {RelationKind::kExists, {"face-region-1"}, region_scale},
      {RelationKind::kExists, {"face-region-2"}, region_scale},
      // Orientation cues that tell the two arm edges and the two sides of
      // torso-2 apart.
      {RelationKind::kRelPos, {"arm-contour-1", "arm-contour-2"}, {}},
      {RelationKind::kRelPos, {"back-contour", "torso-region-2"}, {}},
      {RelationKind::kRelPos, {"arm-contour-1", "palm-region"}, {}},
      {RelationKind::kRelPos, {"arm-contour-2", "palm-region"}, {}},
      // Both arm edges span from torso-1 to the palm.
      {RelationKind::kTouch, {"arm-contour-2", "torso-region-1"}, {}},
      {RelationKind::kTouch, {"arm-contour-1", "palm-region"}, {}},
  };
  m.weights.assign(m.feature_dims(), 0.0);
  m.null_penalties = {{"face-region-1", 0.0}, {"face-region-2", 0.0}};
  return m;
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

std::string model_to_json(const InterpretationModel& model) {
  json j;
  j["format_version"] = InterpretationModel::kFormatVersion;
  j["class_label"] = model.class_label;
  j["native_size"] = {model.native_width, model.native_height};
  j["threshold"] = model.threshold;
  json comps = json::array();
  for (const auto& c : model.components) {
    comps.push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))},
                     {"optional", c.optional}});
  }
  j["components"] = comps;
  json rels = json::array();
  for (const auto& r : model.relations) {
    rels.push_back({{"kind", std::string(to_string(r.kind))},
                    {"operands", r.operands},
                    {"params", {{"tol", r.params.tol}, {"strength_scale", r.params.strength_scale}}}});
  }
  j["relations"] = rels;
  // nlohmann emits the shortest round-trip decimal form of each double.
  j["weights"] = model.weights;
  json pen = json::object();
  for (const auto& [name, v] : model.null_penalties) pen[name] = v;
  j["null_penalties"] = pen;
  return j.dump(2) + "\n";
}

namespace {

PrimitiveKind primitive_kind_from_string(const std::string& s) {
  if (s == "point") return PrimitiveKind::kPoint;
  if (s == "contour") return PrimitiveKind::kContour;
  if (s == "region") return PrimitiveKind::kRegion;
  throw Error(ErrorCode::kInvalidModel, "unknown component kind: " + s);
}

}  // namespace

InterpretationModel model_from_json(const std::string& text) {
  InterpretationModel m;
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != InterpretationModel::kFormatVersion) {
      throw Error(ErrorCode::kInvalidModel, "unsupported model format_version");
    }
    m.class_label = j.at("class_label").get<std::string>();
    if (j.contains("native_size")) {
      m.native_width = j["native_size"].at(0).get<int>();
      m.native_height = j["native_size"].at(1).get<int>();
    }
    m.threshold = j.value("threshold", 0.0);
    for (const auto& c : j.at("components")) {
      m.components.push_back({c.at("name").get<std::string>(),
                              primitive_kind_from_string(c.at("kind").get<std::string>()),
                              c.value("optional", false)});
    }
    for (const auto& r : j.at("relations")) {
      const auto id = r.at("kind").get<std::string>();
      const auto kind = relation_kind_from_string(id);
      if (!kind) throw Error(ErrorCode::kInvalidModel, "unknown relation kind: " + id);
      RelationSpec spec{*kind, r.at("operands").get<std::vector<std::string>>(), {}};
      if (r.contains("params")) {
        spec.params.tol = r["params"].value("tol", spec.params.tol);
        spec.params.strength_scale = r["params"].value("strength_scale", spec.params.strength_scale);
      }
      m.relations.push_back(std::move(spec));
    }
    m.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("null_penalties")) {
      for (const auto& [k, v] : j["null_penalties"].items()) m.null_penalties[k] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidModel, std::string("invalid model file: ") + e.what());
  }
  const auto defects = validate_model(m);
  if (!defects.empty()) throw Error(ErrorCode::kInvalidModel, "invalid model: " + defects.front());
  return m;
}

InterpretationModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open model " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void save_model(const InterpretationModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << model_to_json(model);
}

}  // namespace mirc
