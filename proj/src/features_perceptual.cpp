#include "mcivoice/features_perceptual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mcivoice/dsp.hpp"
#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {

std::vector<std::string> coeff_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
  return names;
}

// Orthonormal DCT-II, first n_out coefficients.
std::vector<double> dct2(const std::vector<double>& x, std::size_t n_out) {
  const std::size_t n = x.size();
  std::vector<double> out(n_out, 0.0);
  for (std::size_t k = 0; k < n_out; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += x[i] * std::cos(std::numbers::pi * static_cast<double>(k) *
                           (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    }
    out[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
  }
  return out;
}

void put_lpc_row(Matrix& m, std::size_t row, std::vector<double> r, std::size_t order,
                 std::size_t n_coeffs) {
  r[0] += kAutocorrFloor;
  const auto lpc = dsp::levinson(r, order);
  auto dst = m.row(row);
  if (!lpc.stable) {
    std::fill(dst.begin(), dst.end(), std::numeric_limits<double>::quiet_NaN());
    return;
  }
  const auto c = dsp::lpc_cepstrum(lpc, n_coeffs);
  std::copy(c.begin(), c.end(), dst.begin());
}

}  // namespace

const char* to_string(CoeffFamily family) {
  switch (family) {
    case CoeffFamily::kMfcc: return "mfcc";
    case CoeffFamily::kLpcc: return "lpcc";
    case CoeffFamily::kPlp: return "plp";
    case CoeffFamily::kDelta: return "delta";
    case CoeffFamily::kDeltaDelta: return "delta2";
  }
  return "unknown";
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(std::size_t n_mels, std::size_t nfft, int rate) {
  const std::size_t n_bins = nfft / 2 + 1;
  Matrix fb(n_mels, n_bins);
  const double mel_hi = hz_to_mel(0.5 * rate);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(nfft);
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      fb(m, k) = w;
    }
  }
  return fb;
}

CoeffTrack mfcc(const FrameSequence& frames, const MfccConfig& cfg) {
  if (cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_mels) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < n_coeffs <= n_mels");
  }
  CoeffTrack out;
  out.family = CoeffFamily::kMfcc;
  out.names = coeff_names(cfg.n_coeffs);
  out.values = Matrix(frames.size(), cfg.n_coeffs);
  if (frames.empty()) return out;
  const std::size_t nfft = dsp::next_pow2(frames.frame_len);
  const auto window = dsp::hann(frames.frame_len);
  const Matrix fb = mel_filterbank(cfg.n_mels, nfft, frames.sample_rate);
  std::vector<double> logmel(cfg.n_mels);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto emph = dsp::pre_emphasis(frames.frames[f], cfg.pre_emphasis);
    const auto power = dsp::power_spectrum(emph, window, nfft);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += fb(m, k) * power[k];
      logmel[m] = std::log(std::max(e, cfg.log_floor));
    }
    const auto c = dct2(logmel, cfg.n_coeffs);
    std::copy(c.begin(), c.end(), out.values.row(f).begin());
  }
  return out;
}

CoeffTrack lpcc(const FrameSequence& frames, const LpccConfig& cfg) {
  if (cfg.n_coeffs < cfg.lpc_order || cfg.lpc_order == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < lpc_order <= n_coeffs");
  }
  CoeffTrack out;
  out.family = CoeffFamily::kLpcc;
  out.names = coeff_names(cfg.n_coeffs);
  out.values = Matrix(frames.size(), cfg.n_coeffs);
  const auto window = dsp::hamming(frames.frame_len);
  std::vector<double> x(frames.frame_len);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& src = frames.frames[f];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = src[i] * window[i];
    put_lpc_row(out.values, f, dsp::autocorrelation(x, cfg.lpc_order), cfg.lpc_order,
                cfg.n_coeffs);
  }
  return out;
}

double hz_to_bark(double hz) { return 6.0 * std::asinh(hz / 600.0); }

double equal_loudness(double hz) {
  const double w2 = std::pow(2.0 * std::numbers::pi * hz, 2);
  return (w2 + 56.8e6) * w2 * w2 / (std::pow(w2 + 6.3e6, 2) * (w2 + 0.38e9));
}

CoeffTrack plp(const FrameSequence& frames, const PlpConfig& cfg) {
  if (cfg.model_order == 0 || cfg.n_coeffs < cfg.model_order) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < model_order <= n_coeffs");
  }
  CoeffTrack out;
  out.family = CoeffFamily::kPlp;
  out.names = coeff_names(cfg.n_coeffs);
  out.values = Matrix(frames.size(), cfg.n_coeffs);
  if (frames.empty()) return out;

  const int rate = frames.sample_rate;
  const std::size_t nfft = dsp::next_pow2(frames.frame_len);
  const std::size_t n_bins = nfft / 2 + 1;
  const double bark_max = hz_to_bark(0.5 * rate);
  const auto n_bands = static_cast<std::size_t>(std::ceil(bark_max)) + 1;
  const double step = bark_max / static_cast<double>(n_bands - 1);

  // Critical-band masking curve sampled at each FFT bin, times equal loudness.
  Matrix weights(n_bands, n_bins);
  for (std::size_t j = 0; j < n_bands; ++j) {
    const double zc = static_cast<double>(j) * step;
    const double loud = equal_loudness(600.0 * std::sinh(zc / 6.0));
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double dz =
          hz_to_bark(static_cast<double>(k) * rate / static_cast<double>(nfft)) - zc;
      double psi = 0.0;
      if (dz >= -1.3 && dz < -0.5) psi = std::pow(10.0, 2.5 * (dz + 0.5));
      else if (dz >= -0.5 && dz <= 0.5) psi = 1.0;
      else if (dz > 0.5 && dz <= 2.5) psi = std::pow(10.0, -(dz - 0.5));
      weights(j, k) = psi * loud;
    }
  }

  const auto window = dsp::hann(frames.frame_len);
  const std::size_t order = cfg.model_order;
  std::vector<double> band(n_bands);
  std::vector<double> r(order + 1);
  const double span = static_cast<double>(n_bands - 1);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto power = dsp::power_spectrum(frames.frames[f], window, nfft);
    for (std::size_t j = 0; j < n_bands; ++j) {
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += weights(j, k) * power[k];
      band[j] = std::cbrt(e);
    }
    band.front() = band[1];
    band.back() = band[n_bands - 2];
    // Inverse DFT of the even-symmetric auditory spectrum.
    for (std::size_t lag = 0; lag <= order; ++lag) {
      double s = band.front() + (lag % 2 == 0 ? 1.0 : -1.0) * band.back();
      for (std::size_t j = 1; j + 1 < n_bands; ++j) {
        s += 2.0 * band[j] *
             std::cos(std::numbers::pi * static_cast<double>(lag * j) / span);
      }
      r[lag] = s / (2.0 * span);
    }
    put_lpc_row(out.values, f, r, order, cfg.n_coeffs);
  }
  return out;
}

std::pair<CoeffTrack, CoeffTrack> deltas(const CoeffTrack& track, std::size_t width) {
  if (width == 0) throw Error(ErrorCode::kInvalidArgument, "delta width must be positive");
  auto regress = [width](const Matrix& m) {
    Matrix d(m.rows, m.cols);
    if (m.rows == 0) return d;
    double denom = 0.0;
    for (std::size_t n = 1; n <= width; ++n) denom += static_cast<double>(n * n);
    denom *= 2.0;
    const auto last = static_cast<std::ptrdiff_t>(m.rows) - 1;
    for (std::size_t t = 0; t < m.rows; ++t) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        double acc = 0.0;
        for (std::size_t n = 1; n <= width; ++n) {
          const auto ti = static_cast<std::ptrdiff_t>(t);
          const auto nn = static_cast<std::ptrdiff_t>(n);
          const auto fwd = static_cast<std::size_t>(std::min(ti + nn, last));
          const auto back = static_cast<std::size_t>(std::max<std::ptrdiff_t>(ti - nn, 0));
          acc += static_cast<double>(n) * (m(fwd, c) - m(back, c));
        }
        d(t, c) = acc / denom;
      }
    }
    return d;
  };
  CoeffTrack d1{regress(track.values), CoeffFamily::kDelta, track.names};
  CoeffTrack d2{regress(d1.values), CoeffFamily::kDeltaDelta, track.names};
  return {std::move(d1), std::move(d2)};
}

}  // namespace mcivoice
