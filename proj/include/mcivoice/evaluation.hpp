#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/dataset.hpp"
#include "mcivoice/selection.hpp"

namespace mcivoice {

// Fold index in [0, k) per sample. Each class is shuffled with the seed and
// dealt round-robin, so per-fold class counts differ by at most one.
// Throws kClassTooSmall if a class has fewer than k members.
std::vector<std::size_t> stratified_kfold(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed);

// 100 * mismatches / length.
double cer(std::span<const int> predicted, std::span<const int> truth);

enum class PreprocessPolicy {
  kPerFold,  // imputation, U-test, ranking and scaling fitted on training folds only
  kGlobal,   // fitted once on the full dataset before cross-validation
};

const char* to_string(PreprocessPolicy policy);

struct SelectionParams {
  bool enabled = true;
  double alpha = 0.1;
  std::size_t k = 80;
  SvmRankConfig rank;
};

// Fitted preprocessing chain: median imputation -> U-test filter -> min-max
// scaling -> SVM ranking -> top-k columns.
struct Preprocessor {
  std::vector<double> medians;
  std::vector<std::size_t> utest_columns;  // into the original features
  NormalizationParams norm;                // over utest_columns
  std::vector<std::size_t> final_columns;  // into utest_columns
  SelectionReport report;

  Dataset transform(const Dataset& ds) const;
  std::size_t n_utest() const { return utest_columns.size(); }
  std::size_t n_final() const { return final_columns.size(); }
};

Preprocessor fit_preprocessor(const Dataset& ds, const SelectionParams& params);

struct CvConfig {
  std::size_t k = 10;
  std::uint64_t seed = 1;
  PreprocessPolicy policy = PreprocessPolicy::kPerFold;
  SelectionParams selection;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  std::size_t errors = 0;
  double cer = 0.0;
  std::size_t d_utest = 0;
  std::size_t d_final = 0;
};

struct EvaluationReport {
  ClassifierSpec spec;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  PreprocessPolicy policy = PreprocessPolicy::kPerFold;
  SelectionParams selection;
  std::size_t n = 0;
  std::size_t d_initial = 0;
  std::vector<FoldResult> folds;
  double cer = 0.0;            // pooled over all test predictions
  double mean_fold_cer = 0.0;
  std::array<double, 2> class_cer{};  // CR, MCI
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [truth][predicted]
  std::vector<int> predictions;  // per sample, in dataset order
  double seconds = 0.0;          // wall time, not part of the serialised report
};

// Runs k-fold cross-validation; k == N selects leave-one-out.
EvaluationReport cross_validate(const Dataset& ds, const ClassifierSpec& spec, const CvConfig& cfg);

// Deterministic JSON (no timing) for files that must be byte-identical on rerun.
std::string report_to_json(const EvaluationReport& report, const std::string& config_hash = {});
std::string report_csv_header();
std::string report_csv_row(const EvaluationReport& report);

}  // namespace mcivoice
