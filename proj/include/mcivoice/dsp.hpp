#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Shared signal-processing kernels used by the feature extractors.
namespace mcivoice::dsp {

std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& x);

std::vector<double> hann(std::size_t n);
std::vector<double> hamming(std::size_t n);

// |X(k)|^2 for k = 0..nfft/2 of the windowed, zero-padded frame.
std::vector<double> power_spectrum(std::span<const double> frame, std::span<const double> window,
                                   std::size_t nfft);

// y[0] = x[0], y[n] = x[n] - alpha * x[n-1]
std::vector<double> pre_emphasis(std::span<const double> x, double alpha);

// Biased autocorrelation r[k] = (1/N) sum x[n] x[n+k], k = 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

struct LpcResult {
  // Predictor coefficients a[1..p] stored at a[0..p-1]: x[n] ~ sum a[k] x[n-k].
  std::vector<double> a;
  double error = 0.0;
  bool stable = false;
};

// Levinson-Durbin recursion on autocorrelation r[0..order].
LpcResult levinson(std::span<const double> r, std::size_t order);

// LPC cepstrum: c0 = ln(error), c_n = a_n + sum_{k=1}^{n-1} (k/n) c_k a_{n-k}.
std::vector<double> lpc_cepstrum(const LpcResult& lpc, std::size_t n_coeffs);

// Normalised cross-correlation between x[0..N-lag) and x[lag..N).
double normalized_autocorr(std::span<const double> x, std::size_t lag);

struct Peak {
  double position = 0.0;
  double value = 0.0;
};

// Vertex of the parabola through (i-1, i, i+1).
Peak parabolic_peak(double left, double centre, double right, double index);

}  // namespace mcivoice::dsp
