#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mcivoice/audio_io.hpp"
#include "mcivoice/classifiers.hpp"
#include "mcivoice/dataset.hpp"
#include "mcivoice/evaluation.hpp"
#include "mcivoice/feature_assembly.hpp"
#include "mcivoice/segmentation.hpp"

namespace mcivoice {

struct PipelineConfig {
  int sample_rate = kCanonicalRate;
  VadConfig vad;
  FeatureConfig features;
  SelectionParams selection;
  std::vector<ClassifierKind> classifiers = {ClassifierKind::kKnn, ClassifierKind::kSvm,
                                             ClassifierKind::kMlp, ClassifierKind::kCnn};
  KnnParams knn;
  SvmParams svm;
  MlpParams mlp;
  CnnParams cnn;
  std::size_t cv_k = 10;
  std::uint64_t seed = 1;
  std::size_t repeats = 1;
  PreprocessPolicy policy = PreprocessPolicy::kPerFold;
  std::size_t threads = 0;  // 0 = hardware concurrency; not part of the hash

  // Applies one "key = value" setting. Throws kInvalidArgument on an unknown
  // key or unparsable value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static std::vector<std::string> keys();

  // Every key with its current value, sorted, one "key = value" per line.
  std::string to_text() const;
  // 16 hex digits of FNV-1a over to_text().
  std::string hash() const;
  void validate() const;

  ClassifierSpec spec_for(ClassifierKind kind) const;
  CvConfig cv_config(std::size_t repeat = 0) const;
};

// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);
// Defaults, then the file (if non-empty path), then overrides, in that order.
PipelineConfig load_config(const std::filesystem::path& file,
                           const std::map<std::string, std::string>& overrides = {});

std::uint64_t fnv1a64(std::string_view text);
std::string to_hex(std::uint64_t value);

// read -> resample -> VAD -> stream split -> features.
struct RecordingAnalysis {
  AudioSignal audio;
  SegmentList segments;
  NamedFeatureVector features;
};
RecordingAnalysis analyse_recording(const std::filesystem::path& wav, const PipelineConfig& cfg);
SegmentList segment_file(const std::filesystem::path& wav, const PipelineConfig& cfg);

// "filename,label" per line; blank lines, '#' comments and a
// "filename,label" header are skipped.
std::map<std::string, int> read_label_file(const std::filesystem::path& path);

struct ExtractResult {
  Dataset dataset;
  std::vector<std::string> problems;  // one line per skipped or failing file
};

// One row per labelled WAV in `dir`, in sorted filename order. Unlabelled or
// unreadable files abort with kIo unless skip_bad is set.
ExtractResult extract_directory(const std::filesystem::path& dir,
                                const std::filesystem::path& label_file,
                                const PipelineConfig& cfg, bool skip_bad);

struct Funnel {
  std::size_t d_initial = 0;
  std::size_t d_utest = 0;
  std::size_t d_final = 0;
};

// Dimensions after fitting the selection chain on the full dataset.
Funnel compute_funnel(const Dataset& ds, const SelectionParams& params);
std::string funnel_line(const Funnel& f);

struct RunResult {
  Funnel funnel;
  std::vector<EvaluationReport> reports;  // classifier-major, then repeat
};

RunResult run_pipeline(const Dataset& ds, const PipelineConfig& cfg);
// Deterministic JSON: config hash, config echo, funnel, reports.
std::string run_result_json(const RunResult& result, const PipelineConfig& cfg);

struct SynthClassParams {
  double pause_rate_hz = 0.5;   // mean pauses per second
  double pause_mean_s = 0.25;
  double pause_sd_s = 0.05;
  double f0_mean_hz = 120.0;
  double f0_jitter = 0.005;     // relative sd of successive periods
  double noise_level = 0.001;   // sd of additive white noise
};

struct SynthCorpusSpec {
  std::size_t n_per_class = 30;
  double duration_s = 3.0;
  int sample_rate = kCanonicalRate;
  std::uint64_t seed = 1;
  SynthClassParams cr;
  SynthClassParams mci{1.0, 0.45, 0.08, 120.0, 0.01, 0.001};

  std::string hash() const;
  void validate() const;
};

struct SynthRecording {
  std::string id;
  int label = 0;
  AudioSignal audio;
  SegmentList truth;
};

SynthRecording synth_recording(const SynthClassParams& params, double duration_s, int rate,
                               std::uint64_t seed);
// Writes <id>.wav, <id>.segments.csv and labels.csv; returns the recordings' ids.
std::vector<std::string> synth_corpus(const SynthCorpusSpec& spec,
                                      const std::filesystem::path& out_dir);

}  // namespace mcivoice
