// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Every subcommand is a plain function over a
// RunConfig so tests can drive the tool without spawning processes.
//
// Option precedence: command-line flags, then a TOML/INI file given with
// --config, then built-in defaults. A [train-detector] style section in the
// config file addresses one subcommand.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcclean/pcclean.hpp"

namespace pcclean::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

enum class Preset { Desk, PaperHyper };

[[nodiscard]] inline Preset parse_preset(std::string_view s) {
  if (s == "desk") return Preset::Desk;
  if (s == "paper-hyper") return Preset::PaperHyper;
  throw InvalidArgument("unknown preset '" + std::string(s) + "' (expected desk or paper-hyper)");
}

/// Learning rate and epoch count a preset assigns to a model kind.
struct PresetSchedule {
  double lr;
  std::size_t epochs;
};

inline constexpr double kDeskDetectorLr = 1e-2;
inline constexpr double kDeskDenoiserLr = 1.0;

[[nodiscard]] inline PresetSchedule preset_schedule(Preset p, ModelKind kind) {
  if (p == Preset::PaperHyper) return {kind == ModelKind::Detector ? 1e-4 : 1e-8, 800};
  return {kind == ModelKind::Detector ? kDeskDetectorLr : kDeskDenoiserLr, 50};
}

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string output;
  std::vector<std::string> references;
  std::vector<std::string> checkpoints;
  std::string manifest;
  std::string log;
  std::string pr_curve;
  std::string format;  ///< empty: from the output extension

  // data
  std::string shape = "icosahedron";
  std::size_t points = 10000;
  ContaminationSpec contamination;
  bool analytic_surface = true;

  // model
  ModelConfig model;
  InitScheme init = InitScheme::He;
  bool init_given = false;

  // training and inference
  std::string preset = "desk";
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  std::size_t batch = 16;
  std::size_t samples = 1000;  ///< training patches drawn per cloud
  double alpha = kDefaultAlpha;
  double threshold = kDefaultOutlierThreshold;
  std::size_t patch_points = 500;
  double radius_fraction = PatchOptions::kDefaultRadiusFraction;
  std::uint64_t seed = 0;

  // clean / bench
  bool skip_detect = false;
  bool skip_denoise = false;
  std::size_t repeat = 5;
  std::size_t max_points = 100;
};

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw DataError("failed writing file: " + path);
}

inline CloudFormat output_format(const RunConfig& c) {
  return c.format.empty() ? format_from_path(c.output) : parse_cloud_format(c.format);
}

inline InferenceOptions inference_options(const RunConfig& c) {
  return {c.patch_points, c.radius_fraction, c.seed};
}

struct Checkpoints {
  std::optional<Model> detector;
  std::optional<Model> denoiser;
};

/// Loads every --checkpoint and routes it by the kind stored inside.
inline Checkpoints load_checkpoints(const std::vector<std::string>& paths) {
  Checkpoints out;
  for (const std::string& p : paths) {
    Model m = load_model(p);
    auto& slot = m.kind == ModelKind::Detector ? out.detector : out.denoiser;
    if (slot) throw InvalidArgument("more than one " + to_string(m.kind) + " checkpoint given");
    slot = std::move(m);
  }
  return out;
}

inline ModelConfig training_config(const RunConfig& c, ModelKind kind) {
  ModelConfig cfg = c.model;
  cfg.output_dim = kind == ModelKind::Detector ? 1 : 3;
  cfg.validate();
  return cfg;
}

inline TrainHyper training_hyper(const RunConfig& c, ModelKind kind) {
  const PresetSchedule s = preset_schedule(parse_preset(c.preset), kind);
  TrainHyper h;
  h.batch = c.batch;
  h.lr = c.lr.value_or(s.lr);
  h.epochs = c.epochs.value_or(s.epochs);
  h.seed = c.seed;
  // He for both kinds at desk scale; --init overrides.
  h.init = c.init_given ? c.init : InitScheme::He;
  return h;
}

inline void finish_training(const RunConfig& c, const TrainedModel& t, std::ostream& out) {
  if (c.output.empty()) throw InvalidArgument("--output (checkpoint path) is required");
  save_model(t.model, c.output);
  if (!c.log.empty()) {
    std::ostringstream ss;
    write_loss_log(ss, t.log);
    write_text(c.log, ss.str());
  }
  MetricReport r;
  r.add("model", to_string(t.model.kind)).add("checkpoint", c.output).add("epochs", t.log.size());
  if (!t.log.empty()) r.add("final_loss", t.log.back().mean_loss);
  out << r.str();
}

inline EpochCallback progress(std::ostream& err) {
  return [&err](const EpochLoss& e) { err << "epoch " << e.epoch << " loss " << e.mean_loss << "\n"; };
}

}  // namespace detail

inline int cmd_generate(const RunConfig& c, std::ostream& out) {
  if (c.output.empty()) throw InvalidArgument("generate: --output is required");
  if (c.points == 0) throw InvalidArgument("generate: --points must be positive");
  const PointCloud cloud = generate_shape(parse_shape(c.shape), c.points, c.seed);
  write_cloud(cloud, c.output, detail::output_format(c));
  out << MetricReport().add("shape", c.shape).add("points", cloud.size()).add("output", c.output).str();
  return kOk;
}

/// Writes the contaminated cloud to --output and, with --manifest, a
/// manifest pairing it with the clean input.
inline int cmd_contaminate(const RunConfig& c, std::ostream& out) {
  if (c.inputs.size() != 1) throw InvalidArgument("contaminate: exactly one --input (clean cloud) is required");
  if (c.output.empty()) throw InvalidArgument("contaminate: --output is required");
  PointCloud clean = read_cloud(c.inputs[0]);
  require_non_empty(clean, "contaminate");
  ContaminationSpec spec = c.contamination;
  spec.seed = c.seed;
  const PairedCloud pair =
      c.analytic_surface ? contaminate(clean, spec, Shape(parse_shape(c.shape))) : contaminate(clean, spec);
  write_cloud(pair.contaminated, c.output, detail::output_format(c));
  if (!c.manifest.empty()) {
    // Entries are stored relative to the manifest, which is how they are read.
    namespace fs = std::filesystem;
    const fs::path base = fs::absolute(fs::path(c.manifest)).parent_path();
    auto rel = [&](const std::string& p) { return fs::relative(fs::absolute(p), base).generic_string(); };
    Manifest m;
    m.entries.push_back({rel(c.inputs[0]), rel(c.output), spec});
    write_manifest(m, c.manifest);
  }
  std::size_t outliers = 0;
  for (auto l : pair.labels) outliers += l;
  out << MetricReport().add("points", pair.contaminated.size()).add("outliers", outliers).add("output", c.output).str();
  return kOk;
}

namespace detail {

/// (clean, contaminated) clouds from --manifest, else contaminated clouds
/// from --input paired positionally with --reference.
inline std::vector<std::pair<PointCloud, PointCloud>> training_pairs(const RunConfig& c, bool need_clean) {
  std::vector<std::pair<PointCloud, PointCloud>> pairs;
  if (!c.manifest.empty()) {
    for (const ManifestEntry& e : read_manifest(c.manifest).entries) {
      pairs.emplace_back(need_clean ? read_cloud(e.clean) : PointCloud{}, read_cloud(e.contaminated));
    }
  } else {
    if (need_clean && c.references.size() != c.inputs.size()) {
      throw InvalidArgument("train-denoiser: give one --reference (clean cloud) per --input, or a --manifest");
    }
    for (std::size_t i = 0; i < c.inputs.size(); ++i) {
      pairs.emplace_back(need_clean ? read_cloud(c.references[i]) : PointCloud{}, read_cloud(c.inputs[i]));
    }
  }
  if (pairs.empty()) throw InvalidArgument("no training data: give --input or --manifest");
  return pairs;
}

}  // namespace detail

inline int cmd_train_detector(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ModelConfig cfg = detail::training_config(c, ModelKind::Detector);
  const auto pairs = detail::training_pairs(c, false);
  std::vector<DetectorSample> data;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto part = detector_samples(pairs[i].second, cfg, c.patch_points, c.samples, pcclean::detail::mix_seed(c.seed, i),
                                 c.radius_fraction);
    data.insert(data.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const TrainedModel t = train_detector(data, cfg, detail::training_hyper(c, ModelKind::Detector), detail::progress(err));
  detail::finish_training(c, t, out);
  return kOk;
}

inline int cmd_train_denoiser(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ModelConfig cfg = detail::training_config(c, ModelKind::Denoiser);
  const auto pairs = detail::training_pairs(c, true);
  std::vector<DenoiserSample> data;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto part = denoiser_samples(pairs[i].second, pairs[i].first, cfg, c.patch_points, c.samples,
                                 pcclean::detail::mix_seed(c.seed, i), c.radius_fraction);
    data.insert(data.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const TrainedModel t =
      train_denoiser(data, cfg, detail::training_hyper(c, ModelKind::Denoiser), c.alpha, detail::progress(err));
  detail::finish_training(c, t, out);
  return kOk;
}

/// Detect, remove, denoise. Survivors keep their input order.
inline int cmd_clean(const RunConfig& c, std::ostream& out) {
  if (c.inputs.size() != 1) throw InvalidArgument("clean: exactly one --input is required");
  if (c.output.empty()) throw InvalidArgument("clean: --output is required");
  const auto models = detail::load_checkpoints(c.checkpoints);
  if (!c.skip_detect && !models.detector) throw InvalidArgument("clean: no detector --checkpoint (or pass --skip-detect)");
  if (!c.skip_denoise && !models.denoiser) {
    throw InvalidArgument("clean: no denoiser --checkpoint (or pass --skip-denoise)");
  }
  const PointCloud input = read_cloud(c.inputs[0]);
  require_non_empty(input, "clean");
  const InferenceOptions opt = detail::inference_options(c);

  PointCloud kept = input;
  std::size_t removed = 0;
  if (!c.skip_detect) {
    const OutlierDecision d = classify_outliers(input, *models.detector, c.threshold, opt);
    removed = d.outlier_count();
    kept = remove_outliers(input, d);
    if (kept.empty()) {
      throw DataError("clean: every point was classified as an outlier at threshold " + std::to_string(c.threshold));
    }
  }
  const PointCloud cleaned = c.skip_denoise ? kept : apply_denoise(kept, *models.denoiser, opt);
  write_cloud(cleaned, c.output, detail::output_format(c));

  MetricReport r;
  r.add("input_points", input.size()).add("outliers_removed", removed).add("output_points", cleaned.size());
  if (!c.references.empty()) {
    const PointCloud ref = read_cloud(c.references[0]);
    r.add("chamfer_input", chamfer_distance(input, ref)).add("chamfer_output", chamfer_distance(cleaned, ref));
  }
  out << r.str();
  return kOk;
}

/// Chamfer distance against --reference; with a detector --checkpoint and a
/// labeled --input, also AUPR of its outlier probabilities.
inline int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.inputs.size() != 1) throw InvalidArgument("eval: exactly one --input is required");
  const PointCloud cloud = read_cloud(c.inputs[0]);
  require_non_empty(cloud, "eval");
  const auto models = detail::load_checkpoints(c.checkpoints);
  if (c.references.empty() && !models.detector) {
    throw InvalidArgument("eval: nothing to evaluate; give --reference and/or a detector --checkpoint");
  }
  MetricReport r;
  r.add("points", cloud.size());
  if (!c.references.empty()) r.add("chamfer_distance", chamfer_distance(cloud, read_cloud(c.references[0])));
  if (models.detector) {
    if (!cloud.labels) throw DataError("eval: AUPR needs outlier labels in --input");
    const std::vector<double> probs = outlier_probabilities(cloud, *models.detector, detail::inference_options(c));
    const PRCurve curve = precision_recall_curve(probs, *cloud.labels);
    std::size_t positives = 0;
    for (auto l : *cloud.labels) positives += l;
    const auto decision = OutlierDecision::from_probabilities(probs, c.threshold);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!decision.is_outlier[i]) continue;
      ((*cloud.labels)[i] ? tp : fp) += 1;
    }
    r.add("aupr", aupr(probs, *cloud.labels))
        .add("prevalence", static_cast<double>(positives) / static_cast<double>(cloud.size()))
        .add("threshold", c.threshold)
        .add("outliers_flagged", decision.outlier_count())
        .add("true_positives", tp)
        .add("false_positives", fp);
    if (!c.pr_curve.empty()) {
      std::ostringstream ss;
      write_pr_curve_csv(ss, curve);
      detail::write_text(c.pr_curve, ss.str());
    }
  }
  if (!c.output.empty()) detail::write_text(c.output, r.str());
  out << r.str();
  return kOk;
}

/// Per-point inference time of both graph-conv variants for every given
/// checkpoint, on identical patches and parameters.
inline int cmd_bench(const RunConfig& c, std::ostream& out) {
  if (c.inputs.size() != 1) throw InvalidArgument("bench: exactly one --input is required");
  if (c.checkpoints.empty()) throw InvalidArgument("bench: at least one --checkpoint is required");
  if (c.repeat < 3) throw InvalidArgument("bench: --repeat must be at least 3");
  const PointCloud cloud = read_cloud(c.inputs[0]);
  const auto models = detail::load_checkpoints(c.checkpoints);
  std::string text;
  for (const auto* m : {models.detector ? &*models.detector : nullptr, models.denoiser ? &*models.denoiser : nullptr}) {
    if (!m) continue;
    double per_point[2] = {0.0, 0.0};
    for (GraphConvVariant v : {GraphConvVariant::Dynamic, GraphConvVariant::FixedLowDim}) {
      const BenchReport b = bench_per_point(*m, v, cloud, c.repeat, detail::inference_options(c), c.max_points);
      per_point[v == GraphConvVariant::FixedLowDim] = b.seconds_per_point;
      text += b.report().str() + "\n";
    }
    text += MetricReport()
                .add("stage", to_string(m->kind))
                .add("ours2_over_ours1", per_point[1] / per_point[0])
                .str() +
            "\n";
  }
  if (!c.output.empty()) detail::write_text(c.output, text);
  out << text;
  return kOk;
}

namespace detail {

inline void add_model_options(CLI::App* app, RunConfig& c, std::string& variant, std::vector<std::size_t>& local,
                              std::vector<std::size_t>& head, std::vector<std::size_t>& qstn) {
  app->add_option("--k", c.model.k, "neighbors per node in the graph convolution")->capture_default_str();
  app->add_option("--variant", variant, "graph convolution variant")
      ->check(CLI::IsMember({"ours1", "ours2", "dynamic", "fixed"}))
      ->capture_default_str();
  app->add_option("--local-widths", local, "four local feature network widths")->delimiter(',')->expected(4);
  app->add_option("--global-width", c.model.global_width, "width before the node max-pool")->capture_default_str();
  app->add_option("--head-widths", head, "two head layer widths")->delimiter(',')->expected(2);
  app->add_option("--qstn-widths", qstn, "two spatial transform per-point widths")->delimiter(',')->expected(2);
  app->add_option("--qstn-hidden", c.model.qstn_hidden, "spatial transform hidden width")->capture_default_str();
}

inline void add_inference_options(CLI::App* app, RunConfig& c) {
  app->add_option("--patch-points", c.patch_points, "points per patch")->capture_default_str();
  app->add_option("--radius-fraction", c.radius_fraction, "patch radius as a fraction of the bounding-box diagonal")
      ->capture_default_str();
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

inline void add_training_options(CLI::App* app, RunConfig& c, std::string& init) {
  app->add_option("--input", c.inputs, "training cloud (repeatable)");
  app->add_option("--manifest", c.manifest, "dataset manifest (JSON)");
  app->add_option("--output", c.output, "checkpoint to write");
  app->add_option("--log", c.log, "per-epoch loss log (epoch,mean_loss)");
  app->add_option("--preset", c.preset, "learning-rate and epoch preset")
      ->check(CLI::IsMember({"desk", "paper-hyper"}))
      ->capture_default_str();
  app->add_option("--lr", c.lr, "learning rate (overrides the preset)");
  app->add_option("--epochs", c.epochs, "epochs (overrides the preset)");
  app->add_option("--batch", c.batch, "minibatch size")->capture_default_str();
  app->add_option("--samples", c.samples, "training patches drawn per cloud")->capture_default_str();
  app->add_option("--init", init, "parameter initialization")->check(CLI::IsMember({"he", "uniform"}));
}

}  // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"pcclean: point cloud outlier removal and denoising"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);
  RunConfig c;
  std::string variant = "ours1";
  std::string init;
  std::string unit = "diagonal";
  std::vector<std::size_t> local, head, qstn;

  auto* gen = app.add_subcommand("generate", "sample a synthetic shape");
  gen->add_option("--shape", c.shape, "icosahedron, sphere, cube or torus")->capture_default_str();
  gen->add_option("--points", c.points, "number of points")->capture_default_str();
  gen->add_option("--seed", c.seed, "random seed")->capture_default_str();
  gen->add_option("--output", c.output, "cloud to write")->required();
  gen->add_option("--format", c.format, "xyz or ply-ascii (default: from extension)");

  auto* con = app.add_subcommand("contaminate", "add noise and outliers to a clean cloud");
  con->add_option("--input", c.inputs, "clean cloud")->required();
  con->add_option("--output", c.output, "contaminated cloud to write")->required();
  con->add_option("--format", c.format, "xyz or ply-ascii (default: from extension)");
  con->add_option("--noise-level", c.contamination.noise_level, "noise std as a fraction of the diagonal")
      ->capture_default_str();
  con->add_option("--outlier-fraction", c.contamination.outlier_fraction, "fraction of points made outliers")
      ->capture_default_str();
  con->add_option("--outlier-min-distance", c.contamination.outlier_min_distance, "minimum outlier surface distance")
      ->capture_default_str();
  con->add_option("--distance-unit", unit, "unit of --outlier-min-distance")
      ->check(CLI::IsMember({"diagonal", "sigma"}))
      ->capture_default_str();
  con->add_option("--shape", c.shape, "analytic surface for outlier distances")->capture_default_str();
  con->add_flag("!--sampled-surface", c.analytic_surface, "measure outlier distance to the clean samples instead");
  con->add_option("--seed", c.seed, "random seed")->capture_default_str();
  con->add_option("--manifest", c.manifest, "manifest to write for the (clean, contaminated) pair");

  auto* tdet = app.add_subcommand("train-detector", "train the outlier detector on labeled clouds");
  detail::add_training_options(tdet, c, init);
  detail::add_model_options(tdet, c, variant, local, head, qstn);
  detail::add_inference_options(tdet, c);

  auto* tden = app.add_subcommand("train-denoiser", "train the denoiser on (noisy, clean) pairs");
  detail::add_training_options(tden, c, init);
  detail::add_model_options(tden, c, variant, local, head, qstn);
  detail::add_inference_options(tden, c);
  tden->add_option("--reference", c.references, "clean cloud paired with each --input (repeatable)");
  tden->add_option("--alpha", c.alpha, "weight of the surface term in the loss")->capture_default_str();

  auto* cln = app.add_subcommand("clean", "remove outliers, then denoise");
  cln->add_option("--input", c.inputs, "cloud to clean")->required();
  cln->add_option("--output", c.output, "cleaned cloud to write")->required();
  cln->add_option("--format", c.format, "xyz or ply-ascii (default: from extension)");
  cln->add_option("--checkpoint", c.checkpoints, "detector and/or denoiser checkpoint (repeatable)");
  cln->add_option("--threshold", c.threshold, "outlier probability threshold")->capture_default_str();
  cln->add_option("--reference", c.references, "clean cloud for Chamfer distance reporting");
  cln->add_flag("--skip-detect", c.skip_detect, "denoise only");
  cln->add_flag("--skip-denoise", c.skip_denoise, "remove outliers only");
  detail::add_inference_options(cln, c);

  auto* evl = app.add_subcommand("eval", "Chamfer distance and detector AUPR");
  evl->add_option("--input", c.inputs, "cloud to evaluate")->required();
  evl->add_option("--reference", c.references, "reference clean cloud");
  evl->add_option("--checkpoint", c.checkpoints, "detector checkpoint for AUPR");
  evl->add_option("--threshold", c.threshold, "outlier probability threshold")->capture_default_str();
  evl->add_option("--output", c.output, "report to write");
  evl->add_option("--pr-curve", c.pr_curve, "precision-recall curve CSV to write");
  detail::add_inference_options(evl, c);

  auto* bch = app.add_subcommand("bench", "per-point inference time of both graph-conv variants");
  bch->add_option("--input", c.inputs, "cloud whose points are timed")->required();
  bch->add_option("--checkpoint", c.checkpoints, "model checkpoint (repeatable)")->required();
  bch->add_option("--repeat", c.repeat, "timed repetitions (median reported)")->capture_default_str();
  bch->add_option("--max-points", c.max_points, "points timed per pass (0 = all)")->capture_default_str();
  bch->add_option("--output", c.output, "report to write");
  detail::add_inference_options(bch, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    c.subcommand = app.get_subcommands().front()->get_name();
    c.model.variant = parse_variant(variant);
    c.contamination.distance_unit = parse_distance_unit(unit);
    if (!local.empty()) std::copy(local.begin(), local.end(), c.model.local_widths.begin());
    if (!head.empty()) std::copy(head.begin(), head.end(), c.model.head_widths.begin());
    if (!qstn.empty()) std::copy(qstn.begin(), qstn.end(), c.model.qstn_widths.begin());
    if (!init.empty()) {
      c.init = init == "he" ? InitScheme::He : InitScheme::Uniform;
      c.init_given = true;
    }
    if (c.subcommand == "generate") return cmd_generate(c, out);
    if (c.subcommand == "contaminate") return cmd_contaminate(c, out);
    if (c.subcommand == "train-detector") return cmd_train_detector(c, out, err);
    if (c.subcommand == "train-denoiser") return cmd_train_denoiser(c, out, err);
    if (c.subcommand == "clean") return cmd_clean(c, out);
    if (c.subcommand == "eval") return cmd_eval(c, out);
    return cmd_bench(c, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace pcclean::cli
