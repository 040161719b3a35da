#include "mcivoice/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mcivoice::dsp {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = x[i + k];
        const auto v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  }
  return w;
}

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

std::vector<double> power_spectrum(std::span<const double> frame, std::span<const double> window,
                                   std::size_t nfft) {
  std::vector<std::complex<double>> buf(nfft);
  const std::size_t n = std::min(frame.size(), nfft);
  for (std::size_t i = 0; i < n; ++i) buf[i] = frame[i] * (window.empty() ? 1.0 : window[i]);
  fft(buf);
  std::vector<double> p(nfft / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(buf[k]);
  return p;
}

std::vector<double> pre_emphasis(std::span<const double> x, double alpha) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = x[i] - alpha * x[i - 1];
  return y;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t n = x.size();
  if (n == 0) return r;
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += x[i] * x[i + k];
    r[k] = s / static_cast<double>(n);
  }
  return r;
}

LpcResult levinson(std::span<const double> r, std::size_t order) {
  LpcResult out;
  out.a.assign(order, 0.0);
  if (r.size() < order + 1 || !(r[0] > 0.0) || !std::isfinite(r[0])) {
    out.error = r.empty() ? 0.0 : r[0];
    return out;
  }
  std::vector<double> a(order + 1, 0.0);
  std::vector<double> prev(order + 1, 0.0);
  double err = r[0];
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= a[j] * r[i - j];
    const double k = acc / err;
    prev = a;
    a[i] = k;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] - k * prev[i - j];
    err *= (1.0 - k * k);
    if (!(err > 0.0)) {
      out.error = err;
      return out;
    }
  }
  std::copy(a.begin() + 1, a.end(), out.a.begin());
  out.error = err;
  out.stable = std::isfinite(err);
  return out;
}

std::vector<double> lpc_cepstrum(const LpcResult& lpc, std::size_t n_coeffs) {
  std::vector<double> c(n_coeffs, 0.0);
  if (n_coeffs == 0) return c;
  const std::size_t p = lpc.a.size();
  c[0] = std::log(lpc.error);
  for (std::size_t n = 1; n < n_coeffs; ++n) {
    double acc = n <= p ? lpc.a[n - 1] : 0.0;
    const std::size_t k_lo = n > p ? n - p : 1;
    for (std::size_t k = k_lo; k < n; ++k) {
      acc += (static_cast<double>(k) / static_cast<double>(n)) * c[k] * lpc.a[n - k - 1];
    }
    c[n] = acc;
  }
  return c;
}

double normalized_autocorr(std::span<const double> x, std::size_t lag) {
  if (lag >= x.size()) return 0.0;
  const std::size_t m = x.size() - lag;
  double num = 0.0, e0 = 0.0, e1 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    num += x[i] * x[i + lag];
    e0 += x[i] * x[i];
    e1 += x[i + lag] * x[i + lag];
  }
  const double den = std::sqrt(e0 * e1);
  return den > 0.0 ? num / den : 0.0;
}

Peak parabolic_peak(double left, double centre, double right, double index) {
  const double denom = left - 2.0 * centre + right;
  if (!(std::abs(denom) > 0.0)) return {index, centre};
  double shift = 0.5 * (left - right) / denom;
  shift = std::clamp(shift, -0.5, 0.5);
  return {index + shift, centre - 0.25 * (left - right) * shift};
}

}  // namespace mcivoice::dsp
