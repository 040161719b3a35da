#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcivoice {

struct NonlinearConfig {
  std::size_t entropy_bins = 64;
  std::size_t higuchi_k_max = 10;
  std::size_t pe_order = 3;
  std::size_t pe_delay = 1;
  std::size_t pe_scales = 5;
};

struct NonlinearSummary {
  double shannon_entropy = 0.0;  // bits
  double higuchi_fd = 1.0;
  std::vector<double> mspe;      // always pe_scales long; NaN past the usable scale
  std::size_t scales_computed = 0;
};

// Amplitude-histogram entropy in bits over n_bins equal bins on [min, max].
// NaN for an empty input; 0 for a constant one.
double shannon_entropy(std::span<const double> x, std::size_t n_bins = 64);

// Higuchi curve lengths L(k), k = 1..k_max.
std::vector<double> higuchi_curve_lengths(std::span<const double> x, std::size_t k_max);
// Negative log-log slope of L(k); 1.0 for a constant series. Throws if the
// series is shorter than 10 * k_max.
double higuchi_fd(std::span<const double> x, std::size_t k_max = 10);

// Index in [0, order!) of the ordinal pattern of x[start], x[start+delay], ...
// Ties rank the earlier sample lower.
std::size_t ordinal_pattern(std::span<const double> x, std::size_t start, std::size_t order,
                            std::size_t delay);

// Normalised permutation entropy in [0, 1]; NaN when x.size() <= order * delay.
double permutation_entropy(std::span<const double> x, std::size_t order = 3,
                           std::size_t delay = 1);

std::vector<double> coarse_grain(std::span<const double> x, std::size_t scale);

struct MultiscaleResult {
  std::vector<double> values;  // one entry per computed scale
  std::size_t requested = 0;
};

MultiscaleResult multiscale_pe(std::span<const double> x, std::size_t order = 3,
                               std::size_t delay = 1, std::size_t n_scales = 5);

NonlinearSummary nonlinear_summary(std::span<const double> x, const NonlinearConfig& cfg = {});

}  // namespace mcivoice
