#include "mcivoice/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "mcivoice/error.hpp"

namespace mcivoice {

std::vector<double> u_null_counts(std::size_t n_a, std::size_t n_b) {
  // counts[m][n][u] built up one sample at a time; only the (n_a, n_b) slice is kept.
  std::vector<std::vector<std::vector<double>>> f(
      n_a + 1, std::vector<std::vector<double>>(n_b + 1));
  for (std::size_t m = 0; m <= n_a; ++m) {
    for (std::size_t n = 0; n <= n_b; ++n) {
      auto& cur = f[m][n];
      cur.assign(m * n + 1, 0.0);
      if (m == 0 || n == 0) {
        cur[0] = 1.0;
        continue;
      }
      // Largest observation from a: it exceeds all n values of b.
      const auto& from_a = f[m - 1][n];
      for (std::size_t u = 0; u < from_a.size(); ++u) cur[u + n] += from_a[u];
      const auto& from_b = f[m][n - 1];
      for (std::size_t u = 0; u < from_b.size(); ++u) cur[u] += from_b[u];
    }
  }
  return f[n_a][n_b];
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 UTestMethod method) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kInvalidArgument, "both samples must be non-empty");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) rank_sum_a += midrank;
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }

  MannWhitneyResult r;
  const double prod = static_cast<double>(na) * static_cast<double>(nb);
  r.u_a = rank_sum_a - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
  r.u_b = prod - r.u_a;
  r.u = std::min(r.u_a, r.u_b);

  const bool exact = method == UTestMethod::kExact ||
                     (method == UTestMethod::kAuto && n <= 16 && !ties);
  if (exact) {
    const auto counts = u_null_counts(na, nb);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto limit = static_cast<std::size_t>(std::floor(r.u + 1e-9));
    double tail = 0.0;
    for (std::size_t u = 0; u <= limit && u < counts.size(); ++u) tail += counts[u];
    r.p_two_sided = std::min(1.0, 2.0 * tail / total);
    r.exact = true;
    return r;
  }

  const double nn = static_cast<double>(n);
  const double mean = prod / 2.0;
  const double var = prod / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (!(var > 0.0)) {
    r.p_two_sided = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.u_a - mean) - 0.5) / std::sqrt(var);
  r.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

std::pair<Dataset, SelectionReport> u_test_filter(const Dataset& ds, double alpha) {
  if (ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "U-test needs both classes present");
  }
  SelectionReport report;
  report.alpha = alpha;
  report.n_initial = ds.n_features();
  std::vector<std::size_t> kept;
  std::vector<double> a, b;
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    a.clear();
    b.clear();
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const double v = ds.x(i, j);
      if (std::isnan(v)) continue;
      (ds.labels[i] == 0 ? a : b).push_back(v);
    }
    FeatureSelectionEntry e;
    e.feature = ds.feature_names[j];
    if (!a.empty() && !b.empty()) {
      const auto r = mann_whitney_u(a, b);
      e.u = r.u;
      e.p_value = r.p_two_sided;
    }
    e.u_kept = e.p_value < alpha;
    if (e.u_kept) kept.push_back(j);
    report.entries.push_back(std::move(e));
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kNoFeaturesSurvive,
                "no feature reached p < " + std::to_string(alpha) + "; consider a larger alpha");
  }
  report.n_utest = kept.size();
  return {ds.select_columns(kept), std::move(report)};
}

std::vector<std::size_t> svm_attribute_rank(const Dataset& ds, const SvmRankConfig& cfg) {
  const std::size_t d = ds.n_features();
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "nothing to rank");
  if (ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "SVM ranking needs both classes present");
  }
  std::vector<int> y(ds.n_rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ds.labels[i] == 1 ? 1 : -1;

  std::vector<std::size_t> ranking(d, 0);
  std::vector<std::size_t> alive(d);
  std::iota(alive.begin(), alive.end(), 0);
  Matrix sub;
  while (alive.size() > 1) {
    const std::size_t s = alive.size();
    std::size_t batch = 1;
    if (s > cfg.single_step_tail) {
      const auto frac = static_cast<std::size_t>(std::floor(cfg.batch_fraction * static_cast<double>(s)));
      batch = std::min(std::max<std::size_t>(1, frac), s - cfg.single_step_tail);
    }
    sub = Matrix(ds.n_rows(), s);
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
      for (std::size_t j = 0; j < s; ++j) sub(i, j) = ds.x(i, alive[j]);
    const SmoResult r = smo_train(sub, y, cfg.svm);

    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
      return r.w[p] * r.w[p] < r.w[q] * r.w[q];
    });
    std::vector<bool> drop(s, false);
    for (std::size_t e = 0; e < batch; ++e) {
      ranking[alive[order[e]]] = s - e;
      drop[order[e]] = true;
    }
    std::vector<std::size_t> next;
    for (std::size_t j = 0; j < s; ++j)
      if (!drop[j]) next.push_back(alive[j]);
    alive.swap(next);
  }
  ranking[alive.front()] = 1;
  return ranking;
}

std::vector<std::size_t> top_k_columns(std::span<const std::size_t> ranking, std::size_t k) {
  if (k > ranking.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k = " + std::to_string(k) + " exceeds " +
                                                 std::to_string(ranking.size()) + " features");
  }
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < ranking.size(); ++j)
    if (ranking[j] >= 1 && ranking[j] <= k) cols.push_back(j);
  return cols;
}

Dataset select_top(const Dataset& ds, std::span<const std::size_t> ranking, std::size_t k) {
  if (ranking.size() != ds.n_features()) {
    throw Error(ErrorCode::kDimensionMismatch, "ranking does not match the feature count");
  }
  return ds.select_columns(top_k_columns(ranking, k));
}

NormalizationParams fit_minmax(const Dataset& ds) {
  NormalizationParams p;
  p.min.assign(ds.n_features(), 0.0);
  p.max.assign(ds.n_features(), 0.0);
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const double v = ds.x(i, j);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo <= hi) {
      p.min[j] = lo;
      p.max[j] = hi;
    }
  }
  return p;
}

Dataset apply_minmax(const Dataset& ds, const NormalizationParams& params) {
  if (params.min.size() != ds.n_features()) {
    throw Error(ErrorCode::kDimensionMismatch, "normalisation fitted on a different feature count");
  }
  Dataset out = ds;
  for (std::size_t i = 0; i < out.n_rows(); ++i) {
    for (std::size_t j = 0; j < out.n_features(); ++j) {
      const double range = params.max[j] - params.min[j];
      double& v = out.x(i, j);
      v = range > 0.0 ? std::clamp((v - params.min[j]) / range, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

std::string selection_report_csv(const SelectionReport& report, const std::string& config_hash) {
  std::string out;
  if (!config_hash.empty()) out += "# config=" + config_hash + "\n";
  out += "feature,u,p,u_kept,svm_rank,final_kept\n";
  char buf[128];
  for (const auto& e : report.entries) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d,%zu,%d\n", e.u, e.p_value, e.u_kept ? 1 : 0,
                  e.svm_rank, e.final_kept ? 1 : 0);
    out += e.feature;
    out += buf;
  }
  return out;
}

void write_selection_report(const std::filesystem::path& path, const SelectionReport& report,
                            const std::string& config_hash) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << selection_report_csv(report, config_hash);
}

}  // namespace mcivoice
