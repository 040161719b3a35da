// mcivoice command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/dataset.hpp"
#include "mcivoice/error.hpp"
#include "mcivoice/evaluation.hpp"
#include "mcivoice/pipeline.hpp"
#include "mcivoice/segmentation.hpp"
#include "mcivoice/selection.hpp"

namespace mv = mcivoice;

namespace {

struct Globals {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  bool global_preprocess = false;
  bool skip_bad = false;
  std::optional<std::size_t> threads;
};

mv::PipelineConfig make_config(const Globals& g) {
  std::map<std::string, std::string> overrides;
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw mv::Error(mv::ErrorCode::kInvalidArgument, "--set expects key=value, got " + s);
    }
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (g.seed) overrides["seed"] = std::to_string(*g.seed);
  if (g.global_preprocess) overrides["preprocess"] = "global";
  if (g.threads) overrides["threads"] = std::to_string(*g.threads);
  return mv::load_config(g.config_file, overrides);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw mv::Error(mv::ErrorCode::kIo, "cannot write " + path);
  f << text;
  if (!f) throw mv::Error(mv::ErrorCode::kIo, "short write to " + path);
}

void print_cers(const std::vector<mv::EvaluationReport>& reports) {
  for (const auto& r : reports) {
    std::fprintf(stderr, "%-4s seed=%llu CER=%.2f%% (CR %.2f%%, MCI %.2f%%) %.1fs\n",
                 mv::to_string(r.spec.kind), static_cast<unsigned long long>(r.seed), r.cer,
                 r.class_cer[0], r.class_cer[1], r.seconds);
  }
}

mv::Dataset load_or_extract(const std::string& dataset, const std::string& wav_dir,
                            const std::string& labels, const mv::PipelineConfig& cfg,
                            bool skip_bad) {
  if (!dataset.empty()) return mv::read_dataset(dataset);
  if (wav_dir.empty() || labels.empty()) {
    throw mv::Error(mv::ErrorCode::kInvalidArgument, "need a dataset CSV or --wav-dir with --labels");
  }
  auto res = mv::extract_directory(wav_dir, labels, cfg, skip_bad);
  for (const auto& p : res.problems) std::cerr << "skipped " << p << "\n";
  return std::move(res.dataset);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech-based MCI screening pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_file, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "Config override key=value (repeatable)");
  app.add_option("--seed", g.seed, "Seed (CV shuffling, or corpus seed for synth)");
  app.add_flag("--global-preprocess", g.global_preprocess,
               "Fit selection and scaling once on all data instead of per fold");
  app.add_flag("--skip-bad", g.skip_bad, "Skip unlabelled or unreadable recordings");
  app.add_option("--threads", g.threads, "Extraction threads (0 = all cores)");

  // segment
  auto* seg = app.add_subcommand("segment", "Speech/disfluency segmentation of one WAV");
  std::string seg_wav, seg_out;
  seg->add_option("wav", seg_wav, "Input WAV")->required();
  seg->add_option("-o,--output", seg_out, "Segment CSV (default stdout)");

  // extract
  auto* ext = app.add_subcommand("extract", "Feature dataset from a directory of WAVs");
  std::string ext_dir, ext_labels, ext_out;
  ext->add_option("wav_dir", ext_dir, "Directory of WAV files")->required();
  ext->add_option("labels", ext_labels, "Label file (filename,label)")->required();
  ext->add_option("-o,--output", ext_out, "Dataset CSV (default stdout)");

  // select
  auto* sel = app.add_subcommand("select", "U-test filter, SVM ranking and top-k on a dataset");
  std::string sel_in, sel_out, sel_report;
  sel->add_option("dataset", sel_in, "Dataset CSV")->required();
  sel->add_option("-o,--output", sel_out, "Selected, normalised dataset CSV (default stdout)");
  sel->add_option("--report", sel_report, "Per-feature selection report CSV");

  // train
  auto* trn = app.add_subcommand("train", "Train one classifier on a (selected) dataset");
  std::string trn_in, trn_out, trn_kind = "svm";
  trn->add_option("dataset", trn_in, "Dataset CSV, usually the output of select")->required();
  trn->add_option("-c,--classifier", trn_kind, "knn, svm, mlp, cnn or majority");
  trn->add_option("-o,--output", trn_out, "Model file")->required();

  // predict
  auto* prd = app.add_subcommand("predict", "Apply a trained model to a dataset");
  std::string prd_model, prd_in, prd_out;
  prd->add_option("model", prd_model, "Model file")->required();
  prd->add_option("dataset", prd_in, "Dataset CSV with the model's columns")->required();
  prd->add_option("-o,--output", prd_out, "Predictions CSV (default stdout)");

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Cross-validate classifiers on a dataset");
  std::string evl_in, evl_out;
  std::vector<std::string> evl_kinds;
  bool evl_csv = false;
  evl->add_option("dataset", evl_in, "Dataset CSV")->required();
  evl->add_option("-c,--classifier", evl_kinds, "Classifiers (default from config)");
  evl->add_option("-o,--output", evl_out, "Report file (default stdout)");
  evl->add_flag("--csv", evl_csv, "Flat CSV rows instead of JSON");

  // run
  auto* run = app.add_subcommand("run", "Extract (optional), select and cross-validate");
  std::string run_ds, run_dir, run_labels, run_out, run_ds_out;
  run->add_option("dataset", run_ds, "Dataset CSV (or use --wav-dir/--labels)");
  run->add_option("--wav-dir", run_dir, "Directory of WAVs to extract first");
  run->add_option("--labels", run_labels, "Label file for --wav-dir");
  run->add_option("--save-dataset", run_ds_out, "Write the extracted dataset here");
  run->add_option("-o,--output", run_out, "Report JSON (default stdout)");

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic two-class corpus");
  mv::SynthCorpusSpec sspec;
  std::string syn_out;
  syn->add_option("out_dir", syn_out, "Output directory")->required();
  syn->add_option("--n-per-class", sspec.n_per_class, "Recordings per class")->capture_default_str();
  syn->add_option("--duration", sspec.duration_s, "Seconds per recording")->capture_default_str();
  syn->add_option("--cr-pause-rate", sspec.cr.pause_rate_hz, "CR pauses per second")->capture_default_str();
  syn->add_option("--mci-pause-rate", sspec.mci.pause_rate_hz, "MCI pauses per second")->capture_default_str();
  syn->add_option("--cr-pause-mean", sspec.cr.pause_mean_s, "CR mean pause (s)")->capture_default_str();
  syn->add_option("--mci-pause-mean", sspec.mci.pause_mean_s, "MCI mean pause (s)")->capture_default_str();
  syn->add_option("--cr-jitter", sspec.cr.f0_jitter, "CR relative period jitter")->capture_default_str();
  syn->add_option("--mci-jitter", sspec.mci.f0_jitter, "MCI relative period jitter")->capture_default_str();
  syn->add_option("--noise", sspec.cr.noise_level, "Noise sd (both classes)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const mv::PipelineConfig cfg = make_config(g);

    if (*syn) {
      sspec.sample_rate = cfg.sample_rate;
      sspec.mci.noise_level = sspec.cr.noise_level;
      if (g.seed) sspec.seed = *g.seed;
      const auto ids = mv::synth_corpus(sspec, syn_out);
      std::cerr << "wrote " << ids.size() << " recordings to " << syn_out << " (config=" << sspec.hash()
                << ")\n";
      return 0;
    }

    if (*seg) {
      const auto segs = mv::segment_file(seg_wav, cfg);
      write_text(seg_out, mv::segments_to_csv(segs, cfg.hash()));
    } else if (*ext) {
      auto res = mv::extract_directory(ext_dir, ext_labels, cfg, g.skip_bad);
      for (const auto& p : res.problems) std::cerr << "skipped " << p << "\n";
      write_text(ext_out, mv::dataset_to_csv(res.dataset));
      std::cerr << res.dataset.n_rows() << " recordings x " << res.dataset.n_features() << " features\n";
    } else if (*sel) {
      const auto ds = mv::read_dataset(sel_in);
      const auto pre = mv::fit_preprocessor(ds, cfg.selection);
      auto out = pre.transform(ds);
      out.config_hash = cfg.hash();
      write_text(sel_out, mv::dataset_to_csv(out));
      if (!sel_report.empty()) mv::write_selection_report(sel_report, pre.report, cfg.hash());
      std::cerr << mv::funnel_line({ds.n_features(), pre.n_utest(), pre.n_final()}) << "\n";
    } else if (*trn) {
      const auto ds = mv::read_dataset(trn_in);
      const auto model = mv::train(cfg.spec_for(mv::parse_classifier_kind(trn_kind)), ds);
      mv::save_model(trn_out, model);
      const auto pred = mv::predict_all(model, ds.x);
      std::cerr << "training CER " << mv::cer(pred, ds.labels) << "%\n";
    } else if (*prd) {
      const auto model = mv::load_model(prd_model);
      const auto ds = mv::read_dataset(prd_in);
      const auto pred = mv::predict_all(model, ds.x);
      std::string text = "id,predicted\n";
      for (std::size_t i = 0; i < pred.size(); ++i) {
        text += ds.ids[i] + "," + mv::to_string(static_cast<mv::ClassLabel>(pred[i])) + "\n";
      }
      write_text(prd_out, text);
    } else if (*evl) {
      const auto ds = mv::read_dataset(evl_in);
      std::vector<mv::ClassifierKind> kinds = cfg.classifiers;
      if (!evl_kinds.empty()) {
        kinds.clear();
        for (const auto& k : evl_kinds) kinds.push_back(mv::parse_classifier_kind(k));
      }
      std::vector<mv::EvaluationReport> reports;
      for (auto kind : kinds)
        for (std::size_t r = 0; r < cfg.repeats; ++r)
          reports.push_back(mv::cross_validate(ds, cfg.spec_for(kind), cfg.cv_config(r)));
      std::string text;
      if (evl_csv) {
        text = "config," + mv::report_csv_header() + "\n";
        for (const auto& r : reports) text += cfg.hash() + "," + mv::report_csv_row(r) + "\n";
      } else {
        text = "[\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
          text += mv::report_to_json(reports[i], cfg.hash()) + (i + 1 < reports.size() ? ",\n" : "\n");
        }
        text += "]\n";
      }
      write_text(evl_out, text);
      print_cers(reports);
    } else if (*run) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto ds = load_or_extract(run_ds, run_dir, run_labels, cfg, g.skip_bad);
      if (!run_ds_out.empty()) mv::write_dataset(run_ds_out, ds);
      const auto result = mv::run_pipeline(ds, cfg);
      std::cout << mv::funnel_line(result.funnel) << "\n";
      for (const auto& r : result.reports) {
        std::printf("%s CER %.2f%%\n", mv::to_string(r.spec.kind), r.cer);
      }
      std::fflush(stdout);
      if (!run_out.empty()) write_text(run_out, mv::run_result_json(result, cfg));
      print_cers(result.reports);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "total %.1fs\n", secs);
    }
  } catch (const mv::Error& e) {
    std::cerr << "error [" << mv::to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
