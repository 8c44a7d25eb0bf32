// Copyright 2026 The openset Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "openset/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "openset/analysis.hpp"
#include "openset/calibration.hpp"
#include "openset/error.hpp"
#include "openset/inference.hpp"
#include "openset/ingest.hpp"
#include "openset/metrics.hpp"
#include "openset/objectness_model.hpp"
#include "openset/parallel.hpp"
#include "openset/pipeline.hpp"
#include "openset/synth.hpp"

namespace openset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 7;
  int workers = 0;
};

struct DataPaths {
  std::string dump;
  std::string annotations;
  std::string known;
};

struct EstimatorOptions {
  std::string estimator = "rf";
  std::string drop;
  double iou = kDefaultLabelIou;
  ForestConfig forest;
  MlpConfig mlp;
};

struct EvalFlags {
  std::string grid;
  int top_k = 100;
  bool all_point = false;
};

void add_data_options(CLI::App* cmd, DataPaths& p, bool need_dump = true) {
  if (need_dump) {
    cmd->add_option("--dump", p.dump, "Feature dump (JSON lines)")->required()->check(CLI::ExistingFile);
  }
  cmd->add_option("--annotations", p.annotations, "COCO-style annotations")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--known", p.known, "Known categories config; default: every listed category")
      ->check(CLI::ExistingFile);
}

void add_estimator_options(CLI::App* cmd, EstimatorOptions& e) {
  cmd->add_option("--estimator", e.estimator, "Objectness estimator")
      ->check(CLI::IsMember({"rf", "random_forest", "mlp"}))
      ->capture_default_str();
  cmd->add_option("--drop", e.drop, "Comma-separated features to mask (f_nan,p_conf,s_box,d_center,d_edge)");
  cmd->add_option("--iou", e.iou, "IoU threshold for training labels")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--trees", e.forest.n_trees, "Forest size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-depth", e.forest.max_depth, "Tree depth limit")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--min-split", e.forest.min_samples_split, "Minimum samples to split a node")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--min-leaf", e.forest.min_samples_leaf, "Minimum samples per leaf")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--positive-weight", e.forest.positive_weight, "Weight of object samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--epochs", e.mlp.epochs, "MLP epochs")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--batch", e.mlp.batch_size, "MLP batch size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--lr", e.mlp.learning_rate, "MLP learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--early-stop", e.mlp.early_stop, "Hold out 10% and stop on validation loss");
}

void add_eval_options(CLI::App* cmd, EvalFlags& f, bool with_grid) {
  if (with_grid) {
    cmd->add_option("--grid", f.grid, "Override the threshold grid, e.g. 0,0.1,0.2");
  }
  cmd->add_option("--top-k", f.top_k, "Foreground queries per image")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--all-point", f.all_point, "All-point AP instead of 101-point");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "bad grid value '" + item + "'");
    }
  }
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "empty threshold grid");
  return grid;
}

AnnotatedDataset load_dataset(const std::string& annotations, const std::string& known) {
  std::optional<KnownCategories> k;
  if (!known.empty()) k = load_known_categories(known);
  return load_annotations(annotations, k);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_output(const fs::path& p, std::string_view text) {
  ensure_parent(p);
  write_text_file(p, text);
}

TrainOptions train_options(const EstimatorOptions& e, const GlobalOptions& g) {
  TrainOptions t;
  t.kind = parse_estimator_kind(e.estimator);
  t.forest = e.forest;
  t.mlp = e.mlp;
  t.mask = FeatureMask::parse(e.drop);
  t.iou_threshold = e.iou;
  t.seed = component_seed(g.seed, SeedStream::Model);
  return t;
}

CalibrationOptions calibration_options(const EvalFlags& f) {
  CalibrationOptions c;
  if (!f.grid.empty()) c.grid = parse_grid(f.grid);
  c.top_k = f.top_k;
  c.eval.interpolation = f.all_point ? ApInterpolation::AllPoint : ApInterpolation::Coco101;
  return c;
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

Split load_split_dir(const fs::path& dir, const std::string& known) {
  return {load_feature_dump(dir / "dump.jsonl"), load_dataset((dir / "annotations.json").string(), known)};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-set object detection: objectness estimation, calibration and evaluation",
               "openset"};
  app.set_config("--config", "", "Config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Single seed, fanned out to every random component")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads for parallel stages (0: default)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::function<void()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic train/pretest/test splits");
  std::string synth_out;
  SynthConfig scfg;
  SplitSizes sizes;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--train-images", sizes.train, "Images in the train split")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--pretest-images", sizes.pretest, "Images in the pretest split")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--test-images", sizes.test, "Images in the test split")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--queries", scfg.queries_per_image, "Queries per image")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--feat-dim", scfg.feat_dim, "Feature dimension")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--classes", scfg.n_known_classes, "Known classes")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--known-fraction", scfg.known_fraction, "Share of queries on known objects")->capture_default_str();
  synth->add_option("--unknown-fraction", scfg.unknown_fraction, "Share of queries on unknown objects")->capture_default_str();
  synth->add_option("--artifact-fraction", scfg.artifact_fraction, "Share of edge-artifact queries")->capture_default_str();
  synth->callback([&] {
    // Bad fractions are a usage problem, so check them while parsing.
    scfg.background_fraction = 1.0 - scfg.known_fraction - scfg.unknown_fraction - scfg.artifact_fraction;
    scfg.validate();
    action = [&] {
      const SynthSplits splits = generate_splits(scfg, sizes, g.seed);
      const fs::path root(synth_out);
      write_synth_split(splits.train, root / "train");
      write_synth_split(splits.pretest, root / "pretest");
      write_synth_split(splits.test, root / "test");
      write_known_categories(splits.train.dataset.known, root / "known_categories.json");
      out << "wrote synthetic splits to " << root.string() << "\n";
    };
  });

  // train
  auto* train = app.add_subcommand("train", "Train an objectness estimator");
  DataPaths train_data;
  EstimatorOptions train_est;
  std::string train_out;
  add_data_options(train, train_data);
  add_estimator_options(train, train_est);
  train->add_option("--out", train_out, "Model file")->required();
  train->callback([&] {
    action = [&] {
      const FeatureDump dump = load_feature_dump(train_data.dump);
      const AnnotatedDataset ds = load_dataset(train_data.annotations, train_data.known);
      const ObjectnessModel model = train_objectness(dump, ds, train_options(train_est, g));
      ensure_parent(train_out);
      save_model(model, train_out);
      out << "trained " << estimator_name(kind_of(model)) << " (" << model_mask(model).label()
          << ") -> " << train_out << "\n";
    };
  });

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Choose the confidence threshold on pretest data");
  DataPaths cal_data;
  EvalFlags cal_flags;
  std::string cal_model, cal_out, cal_plot;
  add_data_options(cal, cal_data);
  add_eval_options(cal, cal_flags, true);
  cal->add_option("--model", cal_model, "Model file")->required()->check(CLI::ExistingFile);
  cal->add_option("--out", cal_out, "Calibration curve file")->required();
  cal->add_option("--plot", cal_plot, "Plot data (threshold, mAP, R_u, S columns)");
  cal->callback([&] {
    action = [&] {
      const FeatureDump dump = load_feature_dump(cal_data.dump);
      const AnnotatedDataset ds = load_dataset(cal_data.annotations, cal_data.known);
      const ObjectnessModel model = load_model(cal_model);
      const CalibrationCurve curve = calibrate(dump, ds, model, calibration_options(cal_flags));
      print_warnings(err, curve.warnings);
      ensure_parent(cal_out);
      save_curve(curve, cal_out);
      if (!cal_plot.empty()) write_output(cal_plot, curve_plot_data(curve));
      char line[64];
      std::snprintf(line, sizeof line, "epsilon_star %.2f\n", curve.epsilon_star);
      out << line;
    };
  });

  // infer
  auto* inf = app.add_subcommand("infer", "Produce open-set detections");
  std::string inf_dump, inf_model, inf_curve, inf_out;
  double inf_eps = 0.25;
  int inf_top_k = 100;
  inf->add_option("--dump", inf_dump, "Feature dump")->required()->check(CLI::ExistingFile);
  inf->add_option("--model", inf_model, "Model file")->required()->check(CLI::ExistingFile);
  auto* eps_opt = inf->add_option("--epsilon", inf_eps, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
  auto* curve_opt = inf->add_option("--curve", inf_curve, "Take the threshold from a calibration curve")
                        ->check(CLI::ExistingFile);
  eps_opt->excludes(curve_opt);
  inf->add_option("--top-k", inf_top_k, "Foreground queries per image")->check(CLI::PositiveNumber)->capture_default_str();
  inf->add_option("--out", inf_out, "Predictions file")->required();
  inf->callback([&] {
    if (eps_opt->count() == 0 && curve_opt->count() == 0) {
      throw CLI::RequiredError("--epsilon or --curve");
    }
    action = [&] {
      const FeatureDump dump = load_feature_dump(inf_dump);
      const ObjectnessModel model = load_model(inf_model);
      InferenceConfig icfg;
      icfg.epsilon_star = curve_opt->count() ? load_curve(inf_curve).epsilon_star : inf_eps;
      icfg.top_k = inf_top_k;
      ensure_parent(inf_out);
      write_predictions(infer(score_dump(dump, model), icfg), fs::path(inf_out));
      out << "wrote predictions for " << dump.records.size() << " images -> " << inf_out << "\n";
    };
  });

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate predictions against annotations");
  DataPaths ev_data;
  EvalFlags ev_flags;
  std::string ev_preds, ev_out, ev_label = "model";
  add_data_options(ev, ev_data, false);
  ev->add_option("--predictions", ev_preds, "Predictions file")->required()->check(CLI::ExistingFile);
  ev->add_flag("--all-point", ev_flags.all_point, "All-point AP instead of 101-point");
  ev->add_option("--out", ev_out, "Report file");
  ev->add_option("--label", ev_label, "Row label in the printed table")->capture_default_str();
  ev->callback([&] {
    action = [&] {
      const AnnotatedDataset ds = load_dataset(ev_data.annotations, ev_data.known);
      const Predictions preds = load_predictions(ev_preds);
      EvalOptions eo;
      eo.interpolation = ev_flags.all_point ? ApInterpolation::AllPoint : ApInterpolation::Coco101;
      const EvalReport report = evaluate(preds, ds, eo);
      print_warnings(err, report.warnings);
      if (!ev_out.empty()) {
        ensure_parent(ev_out);
        save_report(report, ev_out);
      }
      const std::vector<std::pair<std::string, EvalReport>> rows{{ev_label, report}};
      out << format_report_table(rows);
    };
  });

  // analyze
  auto* an = app.add_subcommand("analyze", "Score separation across known, unknown and background");
  DataPaths an_data;
  std::string an_model, an_out, an_plot;
  add_data_options(an, an_data);
  an->add_option("--model", an_model, "Model file")->required()->check(CLI::ExistingFile);
  an->add_option("--out", an_out, "Separation report file")->required();
  an->add_option("--plot", an_plot, "KDE plot data (score, role, x, density columns)");
  an->callback([&] {
    action = [&] {
      const FeatureDump dump = load_feature_dump(an_data.dump);
      const AnnotatedDataset ds = load_dataset(an_data.annotations, an_data.known);
      const SeparationReport rep = separation_report(dump, ds, load_model(an_model));
      print_warnings(err, rep.warnings);
      write_output(an_out, serialize_separation(rep));
      if (!an_plot.empty()) write_output(an_plot, kde_plot_data(rep));
      out << format_separation_table(rep);
    };
  });

  // ablate
  auto* ab = app.add_subcommand("ablate", "Feature ablation at a shared threshold");
  std::string ab_train, ab_pretest, ab_test, ab_known, ab_out, ab_table;
  std::vector<std::string> ab_masks;
  EstimatorOptions ab_est;
  EvalFlags ab_flags;
  bool ab_no_baseline = false;
  ab->add_option("--train", ab_train, "Train split directory (dump.jsonl, annotations.json)")
      ->required()
      ->check(CLI::ExistingDirectory);
  ab->add_option("--pretest", ab_pretest, "Pretest split directory")->required()->check(CLI::ExistingDirectory);
  ab->add_option("--test", ab_test, "Test split directory")->required()->check(CLI::ExistingDirectory);
  ab->add_option("--known", ab_known, "Known categories config")->check(CLI::ExistingFile);
  ab->add_option("--mask", ab_masks, "Feature list to drop for one row; 'full' keeps all. Repeatable");
  ab->add_flag("--no-baseline", ab_no_baseline, "Skip the confidence-only baseline row");
  add_estimator_options(ab, ab_est);
  add_eval_options(ab, ab_flags, true);
  ab->add_option("--out", ab_out, "Ablation report file")->required();
  ab->add_option("--table", ab_table, "Also write the printed table here");
  ab->callback([&] {
    action = [&] {
      AblationOptions ao;
      ao.train = train_options(ab_est, g);
      ao.calibration = calibration_options(ab_flags);
      ao.confidence_baseline = !ab_no_baseline;
      for (const auto& m : ab_masks) ao.masks.push_back(m == "full" ? FeatureMask{} : FeatureMask::parse(m));
      const AblationResult res = run_ablation(load_split_dir(ab_train, ab_known), load_split_dir(ab_pretest, ab_known),
                                              load_split_dir(ab_test, ab_known), ao);
      write_output(ab_out, serialize_ablation(res));
      const std::string table = format_ablation_table(res);
      if (!ab_table.empty()) write_output(ab_table, table);
      out << table;
    };
  });

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run every stage: data, train, calibrate, infer, eval, analyze, ablate");
  std::string pl_out, pl_train, pl_pretest, pl_test, pl_known;
  EstimatorOptions pl_est;
  EvalFlags pl_flags;
  SplitSizes pl_sizes;
  pl->add_option("--out", pl_out, "Output directory")->required();
  auto* pl_train_opt = pl->add_option("--train", pl_train, "Train split directory; synthetic data when omitted")
                           ->check(CLI::ExistingDirectory);
  auto* pl_pretest_opt = pl->add_option("--pretest", pl_pretest, "Pretest split directory")->check(CLI::ExistingDirectory);
  auto* pl_test_opt = pl->add_option("--test", pl_test, "Test split directory")->check(CLI::ExistingDirectory);
  pl_train_opt->needs(pl_pretest_opt)->needs(pl_test_opt);
  pl_pretest_opt->needs(pl_train_opt);
  pl_test_opt->needs(pl_train_opt);
  pl->add_option("--known", pl_known, "Known categories config")->check(CLI::ExistingFile);
  pl->add_option("--train-images", pl_sizes.train, "Synthetic train images")->check(CLI::PositiveNumber)->capture_default_str();
  pl->add_option("--pretest-images", pl_sizes.pretest, "Synthetic pretest images")->check(CLI::PositiveNumber)->capture_default_str();
  pl->add_option("--test-images", pl_sizes.test, "Synthetic test images")->check(CLI::PositiveNumber)->capture_default_str();
  add_estimator_options(pl, pl_est);
  add_eval_options(pl, pl_flags, true);
  pl->callback([&] {
    action = [&] {
      const fs::path root(pl_out);
      fs::create_directories(root);
      if (pl_train.empty()) {
        const SynthSplits s = generate_splits(SynthConfig{}, pl_sizes, g.seed);
        write_synth_split(s.train, root / "data" / "train");
        write_synth_split(s.pretest, root / "data" / "pretest");
        write_synth_split(s.test, root / "data" / "test");
        pl_known = (root / "data" / "known_categories.json").string();
        write_known_categories(s.train.dataset.known, pl_known);
        // Read back what was written, so rerunning on data/ gives the same
        // result; box coordinates pass through pixel space on disk.
        pl_train = (root / "data" / "train").string();
        pl_pretest = (root / "data" / "pretest").string();
        pl_test = (root / "data" / "test").string();
      }
      const Split tr = load_split_dir(pl_train, pl_known);
      const Split pre = load_split_dir(pl_pretest, pl_known);
      const Split te = load_split_dir(pl_test, pl_known);

      const TrainOptions topts = train_options(pl_est, g);
      const ObjectnessModel model = train_objectness(tr.dump, tr.dataset, topts);
      save_model(model, root / "model.json");

      const CalibrationOptions copts = calibration_options(pl_flags);
      const CalibrationCurve curve = calibrate(pre.dump, pre.dataset, model, copts);
      print_warnings(err, curve.warnings);
      save_curve(curve, root / "calibration.json");
      write_text_file(root / "calibration.tsv", curve_plot_data(curve));

      const ScoredDump scored = score_dump(te.dump, model);
      InferenceConfig icfg;
      icfg.epsilon_star = curve.epsilon_star;
      icfg.top_k = copts.top_k;
      const Predictions preds = infer(scored, icfg);
      write_predictions(preds, root / "predictions.jsonl");

      const EvalReport report = evaluate(preds, te.dataset, copts.eval);
      print_warnings(err, report.warnings);
      save_report(report, root / "report.json");
      const std::vector<std::pair<std::string, EvalReport>> rows{
          {std::string(estimator_name(topts.kind)), report}};
      write_text_file(root / "report.txt", format_report_table(rows));

      const SeparationReport sep = separation_report(scored, te.dataset);
      write_text_file(root / "separation.json", serialize_separation(sep));
      write_text_file(root / "separation.txt", format_separation_table(sep));
      write_text_file(root / "kde.tsv", kde_plot_data(sep));

      AblationOptions ao;
      ao.train = topts;
      ao.calibration = copts;
      ao.full_model = topts.mask.none() ? &model : nullptr;
      const AblationResult abl = run_ablation(tr, pre, te, ao);
      write_text_file(root / "ablation.json", serialize_ablation(abl));
      const std::string table = format_ablation_table(abl);
      write_text_file(root / "ablation.txt", table);

      char line[64];
      std::snprintf(line, sizeof line, "epsilon_star %.2f\n", curve.epsilon_star);
      out << line << format_report_table(rows) << "\n" << table;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return kExitUsageError;
  } catch (const Error& e) {
    err << json{{"error", error_kind_name(e.kind())}, {"message", e.what()}}.dump() << "\n";
    return kExitUsageError;
  }

  set_worker_count(g.workers);
  try {
    if (action) action();
  } catch (const Error& e) {
    err << json{{"error", error_kind_name(e.kind())}, {"message", e.what()}}.dump() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << json{{"error", "IoError"}, {"message", e.what()}}.dump() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace openset
