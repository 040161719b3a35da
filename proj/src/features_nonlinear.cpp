#include "mcivoice/features_nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double shannon_entropy(std::span<const double> x, std::size_t n_bins) {
  if (n_bins < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two bins");
  if (x.empty()) return kNaN;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return 0.0;
  std::vector<std::size_t> counts(n_bins, 0);
  const double width = hi - lo;
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / width * static_cast<double>(n_bins));
    ++counts[std::min(b, n_bins - 1)];
  }
  double h = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<double> higuchi_curve_lengths(std::span<const double> x, std::size_t k_max) {
  const std::size_t n = x.size();
  std::vector<double> lengths(k_max, 0.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t steps = (n - 1 - m) / k;  // floor((N - m') / k) with 1-based m' = m + 1
      if (steps == 0) continue;
      double s = 0.0;
      for (std::size_t i = 1; i <= steps; ++i) s += std::abs(x[m + i * k] - x[m + (i - 1) * k]);
      const double norm = static_cast<double>(n - 1) / (static_cast<double>(steps * k));
      total += s * norm / static_cast<double>(k);
      ++used;
    }
    lengths[k - 1] = used ? total / static_cast<double>(used) : 0.0;
  }
  return lengths;
}

double higuchi_fd(std::span<const double> x, std::size_t k_max) {
  if (k_max < 2) throw Error(ErrorCode::kInvalidArgument, "k_max must be at least 2");
  if (x.size() < 10 * k_max) {
    throw Error(ErrorCode::kSignalTooShort, "Higuchi FD needs at least 10 * k_max samples");
  }
  const auto lengths = higuchi_curve_lengths(x, k_max);
  if (std::any_of(lengths.begin(), lengths.end(), [](double l) { return !(l > 0.0); })) {
    return 1.0;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double lx = std::log(static_cast<double>(k));
    const double ly = std::log(lengths[k - 1]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

std::size_t ordinal_pattern(std::span<const double> x, std::size_t start, std::size_t order,
                            std::size_t delay) {
  // Lehmer code of the rank vector; rank ties resolved by position.
  std::size_t code = 0;
  for (std::size_t i = 0; i < order; ++i) {
    const double vi = x[start + i * delay];
    std::size_t smaller_after = 0;
    for (std::size_t j = i + 1; j < order; ++j) {
      const double vj = x[start + j * delay];
      // vj ranks below vi when strictly smaller; equal later samples rank above.
      smaller_after += vj < vi;
    }
    code = code * (order - i) + smaller_after;
  }
  return code;
}

double permutation_entropy(std::span<const double> x, std::size_t order, std::size_t delay) {
  if (order < 2 || delay < 1) throw Error(ErrorCode::kInvalidArgument, "need order >= 2, delay >= 1");
  if (x.size() <= order * delay) return kNaN;
  std::size_t n_patterns = 1;
  for (std::size_t i = 2; i <= order; ++i) n_patterns *= i;
  std::vector<std::size_t> counts(n_patterns, 0);
  const std::size_t n_vec = x.size() - (order - 1) * delay;
  for (std::size_t s = 0; s < n_vec; ++s) ++counts[ordinal_pattern(x, s, order, delay)];
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n_vec);
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(n_patterns));
}

std::vector<double> coarse_grain(std::span<const double> x, std::size_t scale) {
  if (scale == 0) throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  std::vector<double> out(x.size() / scale);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < scale; ++j) s += x[i * scale + j];
    out[i] = s / static_cast<double>(scale);
  }
  return out;
}

MultiscaleResult multiscale_pe(std::span<const double> x, std::size_t order, std::size_t delay,
                               std::size_t n_scales) {
  MultiscaleResult out;
  out.requested = n_scales;
  for (std::size_t s = 1; s <= n_scales; ++s) {
    const auto cg = s == 1 ? std::vector<double>(x.begin(), x.end()) : coarse_grain(x, s);
    if (cg.size() <= order * delay) break;
    out.values.push_back(permutation_entropy(cg, order, delay));
  }
  return out;
}

NonlinearSummary nonlinear_summary(std::span<const double> x, const NonlinearConfig& cfg) {
  NonlinearSummary s;
  s.shannon_entropy = shannon_entropy(x, cfg.entropy_bins);
  s.higuchi_fd = x.size() >= 10 * cfg.higuchi_k_max ? higuchi_fd(x, cfg.higuchi_k_max) : kNaN;
  const auto ms = multiscale_pe(x, cfg.pe_order, cfg.pe_delay, cfg.pe_scales);
  s.scales_computed = ms.values.size();
  s.mspe.assign(cfg.pe_scales, kNaN);
  std::copy(ms.values.begin(), ms.values.end(), s.mspe.begin());
  return s;
}

}  // namespace mcivoice
