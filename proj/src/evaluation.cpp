#include "mcivoice/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>

#include "json_io.hpp"
#include "mcivoice/error.hpp"

namespace mcivoice {

std::vector<std::size_t> stratified_kfold(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be at least 2");
  std::vector<std::size_t> fold(labels.size(), 0);
  std::mt19937_64 rng(seed);
  std::size_t next_fold = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < k) {
      throw Error(ErrorCode::kClassTooSmall,
                  std::string("class ") + to_string(static_cast<ClassLabel>(cls)) + " has " +
                      std::to_string(members.size()) + " members, fewer than k = " + std::to_string(k));
    }
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(members[i], members[j]);
    }
    for (std::size_t idx : members) {
      fold[idx] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return fold;
}

double cer(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and truth lengths differ or are empty");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.size());
}

const char* to_string(PreprocessPolicy policy) {
  return policy == PreprocessPolicy::kGlobal ? "global" : "per-fold";
}

Preprocessor fit_preprocessor(const Dataset& ds, const SelectionParams& params) {
  Preprocessor pre;
  pre.medians = fit_median_imputer(ds);
  Dataset imputed = ds;
  apply_median_imputer(imputed, pre.medians);

  if (!params.enabled) {
    pre.utest_columns.resize(ds.n_features());
    std::iota(pre.utest_columns.begin(), pre.utest_columns.end(), 0);
    pre.norm = fit_minmax(imputed);
    pre.final_columns = pre.utest_columns;
    pre.report.n_initial = pre.report.n_utest = pre.report.n_final = ds.n_features();
    return pre;
  }

  auto [filtered, report] = u_test_filter(imputed, params.alpha);
  for (std::size_t j = 0; j < report.entries.size(); ++j)
    if (report.entries[j].u_kept) pre.utest_columns.push_back(j);
  pre.norm = fit_minmax(filtered);
  const Dataset scaled = apply_minmax(filtered, pre.norm);
  const auto ranking = svm_attribute_rank(scaled, params.rank);
  const std::size_t k = std::min(params.k, ranking.size());
  pre.final_columns = top_k_columns(ranking, k);

  report.target_k = params.k;
  for (std::size_t j = 0; j < pre.utest_columns.size(); ++j) {
    auto& entry = report.entries[pre.utest_columns[j]];
    entry.svm_rank = ranking[j];
    entry.final_kept = ranking[j] <= k;
  }
  report.n_final = pre.final_columns.size();
  pre.report = std::move(report);
  return pre;
}

Dataset Preprocessor::transform(const Dataset& ds) const {
  Dataset out = ds;
  apply_median_imputer(out, medians);
  out = apply_minmax(out.select_columns(utest_columns), norm);
  return out.select_columns(final_columns);
}

namespace {

std::vector<std::size_t> assign_folds(const Dataset& ds, const CvConfig& cfg) {
  if (cfg.k == ds.n_rows()) {
    std::vector<std::size_t> loo(ds.n_rows());
    std::iota(loo.begin(), loo.end(), 0);
    return loo;
  }
  if (cfg.k > ds.n_rows()) {
    throw Error(ErrorCode::kInvalidArgument, "k exceeds the number of samples");
  }
  return stratified_kfold(ds.labels, cfg.k, cfg.seed);
}

}  // namespace

EvaluationReport cross_validate(const Dataset& ds, const ClassifierSpec& spec, const CvConfig& cfg) {
  validate(ds);
  const auto t0 = std::chrono::steady_clock::now();
  EvaluationReport rep;
  rep.spec = spec;
  rep.k = cfg.k;
  rep.seed = cfg.seed;
  rep.policy = cfg.policy;
  rep.selection = cfg.selection;
  rep.n = ds.n_rows();
  rep.d_initial = ds.n_features();
  rep.predictions.assign(ds.n_rows(), -1);

  const auto fold_of = assign_folds(ds, cfg);

  Preprocessor global;
  Dataset global_ds;
  if (cfg.policy == PreprocessPolicy::kGlobal) {
    global = fit_preprocessor(ds, cfg.selection);
    global_ds = global.transform(ds);
  }

  for (std::size_t f = 0; f < cfg.k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) (fold_of[i] == f ? test_rows : train_rows).push_back(i);
    if (test_rows.empty()) continue;
    FoldResult fr;
    fr.fold = f;
    fr.n_test = test_rows.size();
    try {
      Dataset train_ds, test_ds;
      if (cfg.policy == PreprocessPolicy::kGlobal) {
        train_ds = global_ds.select_rows(train_rows);
        test_ds = global_ds.select_rows(test_rows);
        fr.d_utest = global.n_utest();
        fr.d_final = global.n_final();
      } else {
        const Dataset raw_train = ds.select_rows(train_rows);
        const Preprocessor pre = fit_preprocessor(raw_train, cfg.selection);
        train_ds = pre.transform(raw_train);
        test_ds = pre.transform(ds.select_rows(test_rows));
        fr.d_utest = pre.n_utest();
        fr.d_final = pre.n_final();
      }
      const TrainedModel model = train(spec, train_ds);
      const auto pred = predict_all(model, test_ds.x);
      for (std::size_t t = 0; t < test_rows.size(); ++t) {
        rep.predictions[test_rows[t]] = pred[t];
        fr.errors += pred[t] != test_ds.labels[t];
      }
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
    }
    fr.cer = 100.0 * static_cast<double>(fr.errors) / static_cast<double>(fr.n_test);
    rep.folds.push_back(fr);
  }

  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const int truth = ds.labels[i];
    const int pred = rep.predictions[i];
    ++rep.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    wrong += truth != pred;
  }
  rep.cer = 100.0 * static_cast<double>(wrong) / static_cast<double>(ds.n_rows());
  double fold_sum = 0.0;
  for (const auto& fr : rep.folds) fold_sum += fr.cer;
  rep.mean_fold_cer = rep.folds.empty() ? 0.0 : fold_sum / static_cast<double>(rep.folds.size());
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t total = rep.confusion[c][0] + rep.confusion[c][1];
    rep.class_cer[c] = total ? 100.0 * static_cast<double>(rep.confusion[c][1 - c]) / static_cast<double>(total) : 0.0;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

nlohmann::ordered_json detail::report_json(const EvaluationReport& r, const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["classifier"] = to_string(r.spec.kind);
  j["spec"] = detail::spec_to_json(r.spec);
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["preprocess"] = to_string(r.policy);
  j["n"] = r.n;
  j["d_initial"] = r.d_initial;
  j["selection"] = {{"enabled", r.selection.enabled}, {"alpha", r.selection.alpha}, {"k", r.selection.k}};
  j["cer"] = r.cer;
  j["mean_fold_cer"] = r.mean_fold_cer;
  j["class_cer"] = {{"CR", r.class_cer[0]}, {"MCI", r.class_cer[1]}};
  j["confusion"] = {{"CR", {{"CR", r.confusion[0][0]}, {"MCI", r.confusion[0][1]}}},
                    {"MCI", {{"CR", r.confusion[1][0]}, {"MCI", r.confusion[1][1]}}}};
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold}, {"n_test", f.n_test}, {"errors", f.errors}, {"cer", f.cer},
                     {"d_utest", f.d_utest}, {"d_final", f.d_final}});
  }
  j["folds"] = std::move(folds);
  return j;
}

std::string report_to_json(const EvaluationReport& r, const std::string& config_hash) {
  return detail::report_json(r, config_hash).dump(2);
}

std::string report_csv_header() {
  return "classifier,k,seed,preprocess,n,d_initial,cer,mean_fold_cer,cer_CR,cer_MCI,cr_as_cr,cr_as_mci,mci_as_cr,mci_as_mci";
}

std::string report_csv_row(const EvaluationReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%zu,%llu,%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%zu,%zu,%zu,%zu",
                to_string(r.spec.kind), r.k, static_cast<unsigned long long>(r.seed),
                to_string(r.policy), r.n, r.d_initial, r.cer, r.mean_fold_cer, r.class_cer[0],
                r.class_cer[1], r.confusion[0][0], r.confusion[0][1], r.confusion[1][0],
                r.confusion[1][1]);
  return buf;
}

}  // namespace mcivoice
