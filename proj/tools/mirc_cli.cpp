// mirc: command-line front end for the interpretation pipeline.
//
// Exit codes: 0 ok, 1 usage/other error, 2 uninterpretable, 3 I/O, 4 invalid model.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mirc/config.hpp"
#include "mirc/error.hpp"
#include "mirc/evaluation.hpp"
#include "mirc/fullimage.hpp"
#include "mirc/learning.hpp"
#include "mirc/serialize.hpp"
#include "mirc/synthgen.hpp"

namespace fs = std::filesystem;
using namespace mirc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUninterpretable = 2;
constexpr int kExitIo = 3;
constexpr int kExitInvalidModel = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUninterpretable: return kExitUninterpretable;
    case ErrorCode::kMissingFile:
    case ErrorCode::kIo:
    case ErrorCode::kMalformedHeader:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kUnsupportedMaxval:
    case ErrorCode::kTruncatedData: return kExitIo;
    case ErrorCode::kInvalidModel: return kExitInvalidModel;
    default: return kExitOther;
  }
}

/// Flags shared by every subcommand, plus config overrides.
struct Common {
  std::optional<std::uint32_t> seed;
  std::string config_path;
  std::string out_dir = ".";

  std::optional<std::size_t> max_candidates, beam_width;
  std::optional<int> epochs, stride;
  std::optional<double> factor, margin;
  std::optional<unsigned> threads;

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) c.seed = *seed;
    if (max_candidates) c.search.max_candidates = *max_candidates;
    if (beam_width) c.search.beam_width = *beam_width;
    if (epochs) c.epochs = *epochs;
    if (stride) c.stride = *stride;
    if (factor) c.reduce_factor = *factor;
    if (margin) c.margin = *margin;
    if (threads) c.threads = *threads;
    return c;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  const RunConfig d;
  cmd->add_option("--seed", common.seed, "random seed (default " + std::to_string(d.seed) + ")");
  cmd->add_option("--config", common.config_path, "JSON config file; flags override it");
  cmd->add_option("--out-dir", common.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--max-candidates", common.max_candidates,
                  "candidates kept per component, K (default " + std::to_string(d.search.max_candidates) + ")");
  cmd->add_option("--beam-width", common.beam_width,
                  "beam width (default " + std::to_string(d.search.beam_width) + ")");
  cmd->add_option("--epochs", common.epochs, "training epochs (default " + std::to_string(d.epochs) + ")");
  cmd->add_option("--stride", common.stride, "scan stride in px (default " + std::to_string(d.stride) + ")");
  cmd->add_option("--factor", common.factor, "reduction factor (default 0.8)");
  cmd->add_option("--margin", common.margin, "loss-augmented training margin (default 0)");
  cmd->add_option("--threads", common.threads, "worker threads, 0 = all cores (default 0)");
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

struct LoadedExample {
  ManifestEntry entry;
  Image image;
  Annotation annotation;
};

std::vector<LoadedExample> load_examples(const std::string& manifest) {
  std::vector<LoadedExample> out;
  for (const auto& e : load_manifest(manifest)) {
    out.push_back({e, load_pgm(e.image), annotation_from_json(read_text_file(e.gold))});
  }
  return out;
}

std::vector<PreparedExample> prepare_all(const InterpretationModel& model,
                                         const std::vector<LoadedExample>& examples,
                                         const TrainConfig& config) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    out.push_back(prepare_example(model, {e.image, e.annotation.gold, e.entry.positive}, config));
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_gen(const Common& common, int n, const std::string& labels, int first_index) {
  const auto cfg = common.resolve();
  const auto dir = ensure_dir(common.out_dir);
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < n; ++i) {
    const int index = first_index + i;
    Label label = Label::kPositive;
    if (labels == "negative" || (labels == "mixed" && index % 2 == 1)) label = Label::kNegative;
    const auto seed = static_cast<std::uint32_t>(cfg.seed + static_cast<std::uint32_t>(index));
    const auto g = generate(seed, label, cfg.glyph_width, cfg.glyph_height);
    char id[32];
    std::snprintf(id, sizeof id, "glyph_%05d", index);
    save_pgm(g.image, dir / (std::string(id) + ".pgm"));
    Annotation a{g.gold, label == Label::kPositive};
    auto gold = nlohmann::json::parse(annotation_to_json(a));
    gold["seed"] = seed;
    gold["placement"] = nlohmann::json::parse(placement_to_json(g.placement));
    write_text_file((dir / (std::string(id) + ".json")).string(), gold.dump(2) + "\n");
    entries.push_back({id, std::string(id) + ".pgm", std::string(id) + ".json", label == Label::kPositive});
  }
  write_text_file((dir / "manifest.json").string(), manifest_to_json(entries));
  std::cout << "wrote " << n << " glyphs to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_gen_scenes(const Common& common, int n, int glyphs, int size) {
  const auto cfg = common.resolve();
  const auto dir = ensure_dir(common.out_dir);
  for (int i = 0; i < n; ++i) {
    const auto seed = static_cast<std::uint32_t>(cfg.seed + static_cast<std::uint32_t>(i));
    const auto scene = generate_scene(seed, glyphs, size, size, cfg.glyph_width);
    char id[32];
    std::snprintf(id, sizeof id, "scene_%05d", i);
    save_pgm(scene.image, dir / (std::string(id) + ".pgm"));
    nlohmann::json planted = nlohmann::json::array();
    for (const auto& p : scene.planted) {
      planted.push_back({{"box", {p.box.x, p.box.y, p.box.w, p.box.h}},
                         {"seed", p.glyph.seed},
                         {"gold", assignment_to_json(to_scene_coordinates(p.glyph.gold, p.box))}});
    }
    nlohmann::json j = {{"seed", seed}, {"width", size}, {"height", size}, {"planted", planted}};
    write_text_file((dir / (std::string(id) + ".json")).string(), j.dump(2) + "\n");
  }
  std::cout << "wrote " << n << " scenes to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const Common& common, const std::string& manifest, const std::string& init_model) {
  const auto cfg = common.resolve();
  const auto tc = cfg.train_config();
  const auto structure = init_model.empty() ? hug_model_structure() : load_model(init_model);
  const auto examples = load_examples(manifest);
  const auto prepared = prepare_all(structure, examples, tc);
  TrainStats stats;
  auto model = train_structured(structure, prepared, tc, &stats);
  model.threshold = calibrate_threshold(model, prepared, tc.search);
  const auto dir = ensure_dir(common.out_dir);
  save_model(model, (dir / "model.json").string());
  nlohmann::json s = {{"epochs_run", stats.epochs_run},
                      {"examples_used", stats.examples_used},
                      {"examples_skipped", stats.examples_skipped},
                      {"updates", stats.updates},
                      {"exact_match", stats.exact_match},
                      {"threshold", model.threshold}};
  write_text_file((dir / "train_stats.json").string(), s.dump(2) + "\n");
  std::cout << "trained on " << stats.examples_used << " grounded positives (" << stats.examples_skipped
            << " skipped), " << stats.epochs_run << " epochs, exact match "
            << (stats.exact_match.empty() ? 0.0 : stats.exact_match.back()) << ", threshold "
            << model.threshold << "\n";
  return kExitOk;
}

int cmd_interpret(const Common& common, const std::string& image_path, const std::string& model_path,
                  bool render) {
  const auto cfg = common.resolve();
  const auto model = load_model(model_path);
  if (const auto problems = validate_model(model); !problems.empty()) {
    throw Error(ErrorCode::kInvalidModel, "invalid model: " + problems.front());
  }
  const auto image = load_pgm(image_path);
  const auto prims = extract_primitives(image, cfg.extraction);
  const auto table = build_candidates(model, prims, cfg.search.max_candidates);
  const auto result = interpret(model, table, cfg.search);
  const auto dir = ensure_dir(common.out_dir);
  const auto stem = stem_of(image_path);
  write_text_file((dir / (stem + ".interp.json")).string(),
                  interpretation_to_json(result.interpretation, model));
  if (render) {
    char label[64];
    std::snprintf(label, sizeof label, "%s %.3f", model.class_label.c_str(), result.interpretation.score);
    write_text_file((dir / (stem + ".svg")).string(),
                    render_svg(image, {{result.interpretation.assignment, label}}));
  }
  std::cout << "score " << result.interpretation.score << " threshold " << model.threshold
            << (result.interpretation.score >= model.threshold ? " recognized" : " not recognized") << "\n";
  return kExitOk;
}

int cmd_eval(const Common& common, const std::string& manifest, const std::string& model_path,
             const std::string& pred_dir) {
  const auto cfg = common.resolve();
  if (model_path.empty() == pred_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "eval needs exactly one of --model or --predictions");
  }
  const auto examples = load_examples(manifest);
  std::optional<InterpretationModel> model;
  if (!model_path.empty()) model = load_model(model_path);
  std::vector<EvalRow> rows;
  std::set<std::string> names;
  for (const auto& e : examples) {
    const ImageDims dims{e.image.width(), e.image.height()};
    EvalRow row;
    row.id = e.entry.id;
    row.label_positive = e.entry.positive;
    Assignment pred;
    Assignment gold = e.annotation.gold;
    if (model) {
      const auto prepared = prepare_example(*model, {e.image, e.annotation.gold, e.entry.positive},
                                            cfg.train_config());
      const auto p = predict(*model, prepared, cfg.search);
      row.score = p ? p->interpretation.score : RecognitionDrop::kUninterpretable;
      row.predicted_positive = p && row.score >= model->threshold;
      if (p) pred = p->interpretation.assignment;
      gold = prepared.evaluation_gold();
    } else {
      const auto j = nlohmann::json::parse(read_text_file((fs::path(pred_dir) / (e.entry.id + ".interp.json")).string()));
      pred = assignment_from_json(j.at("assignment"));
      row.score = j.value("score", 0.0);
      row.predicted_positive = j.value("recognized", true);
    }
    if (row.label_positive) {
      row.result = jaccard_correspondence(pred, gold, dims);
      for (const auto& [k, v] : row.result.jaccard) names.insert(k);
    }
    rows.push_back(std::move(row));
  }
  const std::vector<std::string> components(names.begin(), names.end());
  const auto dir = ensure_dir(common.out_dir);
  write_text_file((dir / "eval.csv").string(), eval_csv(rows, components));
  const auto summary = summarize(rows);
  nlohmann::json s = {{"mean_jaccard", summary.mean_jaccard},
                      {"component_means", summary.component_means},
                      {"accuracy", summary.classification.accuracy()},
                      {"tp", summary.classification.tp},
                      {"fp", summary.classification.fp},
                      {"tn", summary.classification.tn},
                      {"fn", summary.classification.fn}};
  write_text_file((dir / "eval_summary.json").string(), s.dump(2) + "\n");
  std::cout << "mean_jaccard " << summary.mean_jaccard << " accuracy " << summary.classification.accuracy()
            << "\n";
  return kExitOk;
}

int cmd_ablate(const Common& common, const std::string& manifest, const std::string& model_path,
               const std::string& calibration, bool retrain, const std::string& train_manifest) {
  const auto cfg = common.resolve();
  const auto model = load_model(model_path);
  const auto tc = cfg.train_config();
  const auto eval_set = prepare_all(model, load_examples(manifest), tc);
  std::vector<PreparedExample> calib, train;
  AblationConfig ac;
  ac.search = cfg.search;
  ac.retrain = retrain;
  ac.train = tc;
  if (!calibration.empty()) {
    calib = prepare_all(model, load_examples(calibration), tc);
    ac.calibration = &calib;
  }
  if (retrain) {
    if (train_manifest.empty()) throw Error(ErrorCode::kInvalidArgument, "--retrain needs --train");
    train = prepare_all(model, load_examples(train_manifest), tc);
    ac.training = &train;
  }
  AblationReport report;
  for (std::size_t r = 0; r < model.relations.size(); ++r) {
    for (auto& e : ablate_feature(model, eval_set, r, ac)) report.entries.push_back(std::move(e));
  }
  const auto dir = ensure_dir(common.out_dir);
  write_text_file((dir / "ablation.csv").string(), ablation_csv(report));
  std::cout << "wrote " << report.entries.size() << " ablation rows\n";
  return kExitOk;
}

int cmd_reduce(const Common& common, const std::string& image_path) {
  const auto cfg = common.resolve();
  const auto image = load_pgm(image_path);
  const auto dir = ensure_dir(common.out_dir);
  const auto stem = stem_of(image_path);
  for (const auto& d : descendants(image, cfg.reduce_factor)) {
    const auto name = stem + "_" + std::string(to_string(d.step.kind)) + ".pgm";
    save_pgm(d.image, dir / name);
    std::cout << name << " " << d.image.width() << "x" << d.image.height() << "\n";
  }
  return kExitOk;
}

int cmd_scan(const Common& common, const std::string& image_path, const std::vector<std::string>& model_paths,
             bool do_refine, bool render) {
  const auto cfg = common.resolve();
  std::vector<InterpretationModel> models;
  for (const auto& p : model_paths) models.push_back(load_model(p));
  const auto image = load_pgm(image_path);
  auto result = scan(image, models, cfg.scan_params());
  if (result.too_small) std::cerr << "warning: image smaller than every window\n";
  if (do_refine) {
    for (auto& d : result.detections) d = refine(d, image, models[d.model], cfg.search, cfg.extraction);
  }
  const auto global = combine(result.detections, {image.width(), image.height()});
  const auto dir = ensure_dir(common.out_dir);
  const auto stem = stem_of(image_path);
  write_text_file((dir / (stem + ".scan.json")).string(), scan_to_json(result, global, models));
  if (render) {
    Assignment merged;
    std::map<std::string, int> seen;
    for (const auto& c : global.claims) {
      merged[c.component + "#" + std::to_string(seen[c.component]++)] = c.primitive;
    }
    write_text_file((dir / (stem + ".scan.svg")).string(), render_svg(image, {{merged, ""}}, 4));
  }
  std::cout << result.detections.size() << " detections, " << global.claims.size() << " global claims\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mirc: interpretation of minimal image configurations"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Common common;

  auto* gen = app.add_subcommand("gen", "generate a synthetic glyph corpus with gold annotations");
  int gen_n = 200, gen_first = 0;
  std::string gen_labels = "mixed";
  gen->add_option("--n", gen_n, "number of glyphs")->capture_default_str();
  gen->add_option("--first-index", gen_first, "index of the first glyph (seed = seed + index)")
      ->capture_default_str();
  gen->add_option("--labels", gen_labels, "positive | negative | mixed (odd indices negative)")
      ->check(CLI::IsMember({"positive", "negative", "mixed"}))
      ->capture_default_str();
  int gen_scenes = 0, gen_glyphs = 2, gen_size = 120;
  gen->add_option("--scenes", gen_scenes, "write this many full scenes instead of glyphs")
      ->capture_default_str();
  gen->add_option("--glyphs", gen_glyphs, "planted glyphs per scene")->capture_default_str();
  gen->add_option("--scene-size", gen_size, "scene width and height")->capture_default_str();
  add_common(gen, common);

  auto* train = app.add_subcommand("train", "train a model on a corpus manifest and calibrate its threshold");
  std::string train_manifest, train_init;
  train->add_option("--manifest", train_manifest, "corpus manifest")->required();
  train->add_option("--init", train_init, "model file whose structure to train (default: built-in hug)");
  add_common(train, common);

  auto* interp = app.add_subcommand("interpret", "interpret one image");
  std::string interp_image, interp_model;
  bool interp_render = false;
  interp->add_option("image", interp_image, "PGM image")->required();
  interp->add_option("--model", interp_model, "model file")->required();
  interp->add_flag("--render", interp_render, "also write an SVG overlay");
  add_common(interp, common);

  auto* eval = app.add_subcommand("eval", "Jaccard correspondence and classification report");
  std::string eval_manifest, eval_model, eval_pred;
  eval->add_option("--manifest", eval_manifest, "corpus manifest with gold")->required();
  eval->add_option("--model", eval_model, "interpret with this model");
  eval->add_option("--predictions", eval_pred, "directory of <id>.interp.json files instead of a model");
  add_common(eval, common);

  auto* ablate = app.add_subcommand("ablate", "zero each relation in turn and measure the change");
  std::string abl_manifest, abl_model, abl_calib, abl_train;
  bool abl_retrain = false;
  ablate->add_option("--manifest", abl_manifest, "held-out evaluation manifest")->required();
  ablate->add_option("--model", abl_model, "trained model")->required();
  ablate->add_option("--calibration", abl_calib, "recalibrate the threshold on this manifest");
  ablate->add_flag("--retrain", abl_retrain, "retrain without the relation instead of zeroing");
  ablate->add_option("--train", abl_train, "training manifest for --retrain");
  add_common(ablate, common);

  auto* reduce = app.add_subcommand("reduce", "write the five descendants of an image");
  std::string reduce_image;
  reduce->add_option("image", reduce_image, "PGM image")->required();
  add_common(reduce, common);

  auto* scan_cmd = app.add_subcommand("scan", "detect and combine configurations in a large image");
  std::string scan_image;
  std::vector<std::string> scan_models;
  bool scan_refine = false, scan_render = false;
  scan_cmd->add_option("image", scan_image, "PGM image")->required();
  scan_cmd->add_option("--model", scan_models, "model file (repeatable)")->required();
  scan_cmd->add_flag("--refine", scan_refine, "re-interpret detections at full resolution");
  scan_cmd->add_flag("--render", scan_render, "also write an SVG overlay of the global result");
  add_common(scan_cmd, common);

  auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
  add_common(config_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen && gen_scenes > 0) return cmd_gen_scenes(common, gen_scenes, gen_glyphs, gen_size);
    if (*gen) return cmd_gen(common, gen_n, gen_labels, gen_first);
    if (*train) return cmd_train(common, train_manifest, train_init);
    if (*interp) return cmd_interpret(common, interp_image, interp_model, interp_render);
    if (*eval) return cmd_eval(common, eval_manifest, eval_model, eval_pred);
    if (*ablate) return cmd_ablate(common, abl_manifest, abl_model, abl_calib, abl_retrain, abl_train);
    if (*reduce) return cmd_reduce(common, reduce_image);
    if (*scan_cmd) return cmd_scan(common, scan_image, scan_models, scan_refine, scan_render);
    if (*config_cmd) {
      std::cout << config_to_json(common.resolve());
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
