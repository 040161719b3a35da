#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mcivoice/audio_io.hpp"
#include "mcivoice/dataset.hpp"

namespace testutil {

using mcivoice::AudioSignal;

inline AudioSignal sine(double hz, double seconds, double amp = 1.0, int rate = 22050) {
  AudioSignal s;
  s.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return s;
}

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Two-pole resonator cascade excited by an impulse train.
inline AudioSignal resonant_vowel(double f0, double seconds, std::vector<double> formants,
                                  std::vector<double> bandwidths, double amp = 0.5,
                                  int rate = 22050) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n, 0.0);
  const double period = rate / f0;
  for (double t = 0.0; t < static_cast<double>(n); t += period) x[static_cast<std::size_t>(t)] = 1.0;
  for (std::size_t k = 0; k < formants.size(); ++k) {
    const double r = std::exp(-std::numbers::pi * bandwidths[k] / rate);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * formants[k] / rate);
    const double a2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[i] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = v;
      x[i] = v;
    }
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= amp / peak;
  return AudioSignal{x, rate};
}

// 0.5 s near-silence, 1.0 s vowel-like harmonic tone, 0.5 s near-silence.
inline AudioSignal three_part(std::uint64_t seed = 3, int rate = 22050) {
  AudioSignal s;
  s.sample_rate = rate;
  const std::size_t half = static_cast<std::size_t>(rate / 2);
  s.samples.assign(4 * half, 0.0);
  for (std::size_t i = 0; i < 2 * half; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (int h = 1; h <= 5; ++h) v += std::sin(2.0 * std::numbers::pi * 150.0 * h * t) / h;
    s.samples[half + i] = 0.3 * v;
  }
  const auto dither = gaussian(s.size(), seed, 1e-4);
  for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] += dither[i];
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mcivoice_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Dataset with given columns (each a vector of length N) and labels.
inline mcivoice::Dataset make_dataset(const std::vector<std::vector<double>>& cols,
                                      const std::vector<int>& labels) {
  mcivoice::Dataset ds;
  const std::size_t n = labels.size();
  ds.x = mcivoice::Matrix(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    ds.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) ds.x(i, j) = cols[j][i];
  }
  for (std::size_t i = 0; i < n; ++i) ds.ids.push_back("r" + std::to_string(i));
  ds.labels = labels;
  return ds;
}

}  // namespace testutil
