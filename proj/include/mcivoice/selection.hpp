#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/dataset.hpp"

namespace mcivoice {

struct MannWhitneyResult {
  double u = 0.0;            // min(U_a, U_b)
  double u_a = 0.0;
  double u_b = 0.0;
  double p_two_sided = 1.0;
  bool exact = false;
};

enum class UTestMethod { kAuto, kExact, kNormal };

// kAuto: exact null distribution when |a| + |b| <= 16 and there are no ties,
// otherwise the tie- and continuity-corrected normal approximation.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 UTestMethod method = UTestMethod::kAuto);

// Number of rank arrangements giving U_a = u, for u = 0..n_a*n_b.
std::vector<double> u_null_counts(std::size_t n_a, std::size_t n_b);

struct FeatureSelectionEntry {
  std::string feature;
  double u = 0.0;
  double p_value = 1.0;
  bool u_kept = false;
  std::size_t svm_rank = 0;  // 0 when not ranked
  bool final_kept = false;
};

struct SelectionReport {
  std::vector<FeatureSelectionEntry> entries;
  double alpha = 0.1;
  std::size_t target_k = 80;
  std::size_t n_initial = 0;
  std::size_t n_utest = 0;
  std::size_t n_final = 0;
};

// Keeps features with p < alpha. Throws kNoFeaturesSurvive when none do.
std::pair<Dataset, SelectionReport> u_test_filter(const Dataset& ds, double alpha = 0.1);

struct SvmRankConfig {
  SvmParams svm;
  double batch_fraction = 0.1;
  std::size_t single_step_tail = 20;
};

// Recursive feature elimination with a linear SVM. ranking[j] is the rank of
// column j (1 = best, eliminated last).
std::vector<std::size_t> svm_attribute_rank(const Dataset& ds, const SvmRankConfig& cfg = {});

// Keeps the k best-ranked columns in their original order. Throws when k > D.
Dataset select_top(const Dataset& ds, std::span<const std::size_t> ranking, std::size_t k);
std::vector<std::size_t> top_k_columns(std::span<const std::size_t> ranking, std::size_t k);

struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;
};

NormalizationParams fit_minmax(const Dataset& ds);
// (x - min) / (max - min) clamped to [0, 1]; constant features map to 0.
Dataset apply_minmax(const Dataset& ds, const NormalizationParams& params);

// feature,u,p,u_kept,svm_rank,final_kept
std::string selection_report_csv(const SelectionReport& report, const std::string& config_hash = {});
void write_selection_report(const std::filesystem::path& path, const SelectionReport& report,
                            const std::string& config_hash = {});

}  // namespace mcivoice
