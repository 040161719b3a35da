#include "mcivoice/features_classical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "mcivoice/dsp.hpp"
#include "mcivoice/error.hpp"

namespace mcivoice {

FrameDescriptors frame_descriptors(std::span<const double> frame, int rate) {
  FrameDescriptors d;
  if (frame.empty()) return d;
  double e = 0.0;
  for (double x : frame) e += x * x;
  d.short_time_energy = e / static_cast<double>(frame.size());
  d.intensity_db = 10.0 * std::log10(d.short_time_energy + 1e-12);
  if (frame.size() >= 2) {
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < frame.size(); ++i) {
      crossings += (frame[i] >= 0.0) != (frame[i - 1] >= 0.0);
    }
    d.zcr = static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
  }
  const std::size_t nfft = dsp::next_pow2(frame.size());
  const auto window = dsp::hann(frame.size());
  const auto power = dsp::power_spectrum(frame, window, nfft);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double mag = std::sqrt(power[k]);
    num += mag * static_cast<double>(k) * rate / static_cast<double>(nfft);
    den += mag;
  }
  d.spectral_centroid = den > 0.0 ? num / den : 0.0;
  return d;
}

std::size_t PitchTrack::voiced_count() const {
  return static_cast<std::size_t>(std::count_if(f0.begin(), f0.end(), [](double f) { return f > 0.0; }));
}

PitchTrack pitch_track(const FrameSequence& frames, const PitchConfig& cfg) {
  const int rate = frames.sample_rate;
  if (!(cfg.f0_min > 0.0) || !(cfg.f0_min < cfg.f0_max) || cfg.f0_max > rate / 4.0) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < f0_min < f0_max <= rate/4");
  }
  PitchTrack track;
  track.frame_len = frames.frame_len;
  track.hop = frames.hop;
  track.sample_rate = rate;
  track.f0.assign(frames.size(), 0.0);
  track.strength.assign(frames.size(), 0.0);
  track.times.resize(frames.size());

  const auto lag_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / cfg.f0_max)));
  std::size_t lag_max = static_cast<std::size_t>(std::ceil(rate / cfg.f0_min));
  if (frames.frame_len >= 3) lag_max = std::min(lag_max, frames.frame_len - 2);

  std::vector<double> r;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    track.times[f] = frames.time_of(f);
    const auto& x = frames.frames[f];
    if (lag_max <= lag_min) continue;
    // r[k] holds the correlation at lag lag_min - 1 + k so every candidate has neighbours.
    r.assign(lag_max - lag_min + 3, 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = dsp::normalized_autocorr(x, lag_min - 1 + k);

    double best = -1.0;
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
      if (r[k] >= r[k - 1] && r[k] > r[k + 1]) best = std::max(best, r[k]);
    }
    if (best < cfg.voicing_threshold) continue;
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
      if (r[k] >= r[k - 1] && r[k] > r[k + 1] && r[k] >= best - cfg.octave_tolerance) {
        const auto peak =
            dsp::parabolic_peak(r[k - 1], r[k], r[k + 1], static_cast<double>(lag_min - 1 + k));
        const double f0 = rate / peak.position;
        if (f0 >= cfg.f0_min && f0 <= cfg.f0_max) {
          track.f0[f] = f0;
          track.strength[f] = std::min(1.0, peak.value);
        }
        break;
      }
    }
  }
  return track;
}

double jitter_local(std::span<const double> periods) {
  if (periods.size() < 2) return kSentinel;
  double diff = 0.0, mean = 0.0;
  for (std::size_t i = 1; i < periods.size(); ++i) diff += std::abs(periods[i] - periods[i - 1]);
  for (double p : periods) mean += p;
  diff /= static_cast<double>(periods.size() - 1);
  mean /= static_cast<double>(periods.size());
  return mean > 0.0 ? diff / mean : kSentinel;
}

double shimmer_local(std::span<const double> amplitudes) { return jitter_local(amplitudes); }

double apq5(std::span<const double> amplitudes) {
  if (amplitudes.size() < 5) return kSentinel;
  double dev = 0.0, mean = 0.0;
  for (std::size_t i = 2; i + 2 < amplitudes.size(); ++i) {
    double avg = 0.0;
    for (std::size_t j = i - 2; j <= i + 2; ++j) avg += amplitudes[j];
    dev += std::abs(amplitudes[i] - avg / 5.0);
  }
  for (double a : amplitudes) mean += a;
  dev /= static_cast<double>(amplitudes.size() - 4);
  mean /= static_cast<double>(amplitudes.size());
  return mean > 0.0 ? dev / mean : kSentinel;
}

PeriodMarks period_marks(const AudioSignal& sig, const PitchTrack& track) {
  PeriodMarks marks;
  const std::size_t n = sig.size();
  if (n < 3 || track.size() == 0 || track.hop == 0) return marks;
  const auto& x = sig.samples;
  const double hop = static_cast<double>(track.hop);
  const double len = static_cast<double>(track.frame_len);

  auto period_at = [&](double pos, std::size_t a, std::size_t b) {
    const double idx = std::round((pos - 0.5 * len) / hop);
    const auto f = static_cast<std::size_t>(std::clamp(idx, static_cast<double>(a), static_cast<double>(b)));
    return track.sample_rate / track.f0[f];
  };

  for (std::size_t a = 0; a < track.size();) {
    if (!track.voiced(a)) {
      ++a;
      continue;
    }
    std::size_t b = a;
    while (b + 1 < track.size() && track.voiced(b + 1)) ++b;

    const double lo = a == 0 ? 0.0 : a * hop + 0.5 * (len - hop);
    const double hi = b + 1 == track.size() ? static_cast<double>(n) : b * hop + 0.5 * (len + hop);
    const auto start = static_cast<std::size_t>(std::max(0.0, lo));
    const auto stop = std::min(n, static_cast<std::size_t>(std::max(0.0, hi)));

    std::vector<double> pos, amp;
    auto take_peak = [&](std::size_t from, std::size_t to) -> bool {
      if (from >= to || to > stop) return false;
      std::size_t m = from;
      for (std::size_t i = from; i < to; ++i)
        if (x[i] > x[m]) m = i;
      double p = static_cast<double>(m), v = x[m];
      if (m > 0 && m + 1 < n) {
        const auto pk = dsp::parabolic_peak(x[m - 1], x[m], x[m + 1], p);
        if (x[m] >= x[m - 1] && x[m] >= x[m + 1]) {
          p = pk.position;
          v = pk.value;
        }
      }
      pos.push_back(p);
      amp.push_back(v);
      return true;
    };

    if (start < stop) {
      const double t0 = period_at(static_cast<double>(start), a, b);
      if (take_peak(start, std::min(stop, start + static_cast<std::size_t>(std::ceil(t0))))) {
        while (true) {
          const double prev = pos.back();
          const double t = period_at(prev, a, b);
          const auto from = static_cast<std::size_t>(std::ceil(prev + 0.8 * t));
          const auto to = static_cast<std::size_t>(std::floor(prev + 1.2 * t)) + 1;
          if (to > stop || !take_peak(from, to)) break;
        }
      }
    }
    if (!pos.empty()) {
      marks.positions.push_back(std::move(pos));
      marks.amplitudes.push_back(std::move(amp));
    }
    a = b + 1;
  }
  return marks;
}

Perturbation perturbation(const AudioSignal& sig, const PitchTrack& track) {
  const PeriodMarks marks = period_marks(sig, track);
  double period_diff = 0.0, period_sum = 0.0;
  double amp_diff = 0.0, amp_sum = 0.0, apq_dev = 0.0;
  std::size_t n_pdiff = 0, n_period = 0, n_adiff = 0, n_amp = 0, n_apq = 0;
  for (std::size_t s = 0; s < marks.positions.size(); ++s) {
    const auto& p = marks.positions[s];
    const auto& a = marks.amplitudes[s];
    if (p.size() < 4) continue;  // fewer than three consecutive periods
    std::vector<double> periods(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) periods[i - 1] = p[i] - p[i - 1];
    for (std::size_t i = 0; i < periods.size(); ++i) {
      period_sum += periods[i];
      ++n_period;
      if (i > 0) {
        period_diff += std::abs(periods[i] - periods[i - 1]);
        ++n_pdiff;
      }
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      amp_sum += a[i];
      ++n_amp;
      if (i > 0) {
        amp_diff += std::abs(a[i] - a[i - 1]);
        ++n_adiff;
      }
      if (i >= 2 && i + 2 < a.size()) {
        double avg = 0.0;
        for (std::size_t j = i - 2; j <= i + 2; ++j) avg += a[j];
        apq_dev += std::abs(a[i] - avg / 5.0);
        ++n_apq;
      }
    }
  }
  Perturbation out;
  if (n_pdiff == 0) return out;
  const double mean_period = period_sum / static_cast<double>(n_period);
  const double mean_amp = amp_sum / static_cast<double>(n_amp);
  out.jitter_local = (period_diff / static_cast<double>(n_pdiff)) / mean_period;
  if (mean_amp > 0.0) {
    out.shimmer_local = (amp_diff / static_cast<double>(n_adiff)) / mean_amp;
    if (n_apq > 0) out.apq = (apq_dev / static_cast<double>(n_apq)) / mean_amp;
  }
  return out;
}

double frame_hnr_db(double r) {
  const double c = std::clamp(r, 1e-6, 1.0 - 1e-6);
  return 10.0 * std::log10(c / (1.0 - c));
}

double correlation_at_lag(std::span<const double> frame, double lag) {
  const auto i = static_cast<std::size_t>(std::llround(lag));
  if (i < 1 || i + 1 >= frame.size()) return 0.0;
  const double left = dsp::normalized_autocorr(frame, i - 1);
  const double centre = dsp::normalized_autocorr(frame, i);
  const double right = dsp::normalized_autocorr(frame, i + 1);
  if (centre >= left && centre >= right) {
    return std::min(1.0, dsp::parabolic_peak(left, centre, right, static_cast<double>(i)).value);
  }
  return centre;
}

namespace {

Harmonicity summarize_r(const std::vector<double>& rs) {
  Harmonicity h;
  if (rs.empty()) return h;
  double hnr = 0.0, nhr = 0.0, mean_r = 0.0;
  for (double r : rs) {
    const double c = std::clamp(r, 1e-6, 1.0 - 1e-6);
    hnr += frame_hnr_db(c);
    nhr += (1.0 - c) / c;
    mean_r += c;
  }
  const double n = static_cast<double>(rs.size());
  h.hnr_db = hnr / n;
  h.nhr = nhr / n;
  h.harmonicity_mean = mean_r / n;
  return h;
}

}  // namespace

Harmonicity harmonicity(const FrameSequence& frames, const PitchTrack& track) {
  std::vector<double> rs;
  for (std::size_t f = 0; f < frames.size() && f < track.size(); ++f) {
    if (!track.voiced(f)) continue;
    rs.push_back(correlation_at_lag(frames.frames[f], track.sample_rate / track.f0[f]));
  }
  return summarize_r(rs);
}

Harmonicity harmonicity_at_lag(const FrameSequence& frames, double lag) {
  std::vector<double> rs;
  for (const auto& f : frames.frames) rs.push_back(correlation_at_lag(f, lag));
  return summarize_r(rs);
}

std::size_t default_lpc_order(int rate) {
  return 2 + static_cast<std::size_t>(std::llround(rate / 1000.0));
}

std::vector<double> frame_formants(std::span<const double> frame, int rate,
                                   const FormantConfig& cfg) {
  const std::size_t order = cfg.lpc_order ? cfg.lpc_order : default_lpc_order(rate);
  std::vector<double> out;
  if (frame.size() <= order) return out;
  auto x = dsp::pre_emphasis(frame, cfg.pre_emphasis);
  const auto w = dsp::hamming(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= w[i];
  auto r = dsp::autocorrelation(x, order);
  if (!(r[0] > 0.0)) return out;
  r[0] *= 1.0 + 1e-9;
  const auto lpc = dsp::levinson(r, order);
  if (!lpc.stable) return out;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order),
                                                    static_cast<Eigen::Index>(order));
  for (std::size_t k = 0; k < order; ++k) companion(0, static_cast<Eigen::Index>(k)) = lpc.a[k];
  for (std::size_t k = 1; k < order; ++k) {
    companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return out;

  const double nyquist = 0.5 * rate;
  for (const std::complex<double>& z : solver.eigenvalues()) {
    if (z.imag() <= 0.0) continue;
    const double mag = std::abs(z);
    if (!(mag > 0.0)) continue;
    const double freq = std::arg(z) * rate / (2.0 * std::numbers::pi);
    const double bw = -std::log(mag) * rate / std::numbers::pi;
    if (bw < cfg.max_bandwidth_hz && freq > cfg.min_frequency_hz && freq < nyquist) {
      out.push_back(freq);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

FormantTrack formant_track(const FrameSequence& frames, const PitchTrack* track,
                           const FormantConfig& cfg) {
  FormantTrack out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (track != nullptr) {
      if (f >= track->size() || !track->voiced(f)) continue;
    } else {
      const auto& x = frames.frames[f];
      if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) continue;
    }
    const auto fm = frame_formants(frames.frames[f], frames.sample_rate, cfg);
    if (fm.size() < 3) continue;
    out.f1.push_back(fm[0]);
    out.f2.push_back(fm[1]);
    out.f3.push_back(fm[2]);
    out.frame_index.push_back(f);
  }
  return out;
}

VoicingProfile voicing_profile(const PitchTrack& track, const SegmentList& segs) {
  VoicingProfile v;
  const std::size_t voiced = track.voiced_count();
  v.voiced_frames = static_cast<double>(voiced);
  v.unvoiced_frames = static_cast<double>(track.size() - voiced);
  if (track.size() > 0) v.voiced_fraction = v.voiced_frames / static_cast<double>(track.size());
  std::size_t breaks = 0;
  for (std::size_t i = 1; i < track.size(); ++i) breaks += track.voiced(i - 1) && !track.voiced(i);
  v.n_breaks = static_cast<double>(breaks);

  double speech_s = 0.0;
  std::size_t n_speech = 0, n_pause = 0;
  double pause_s = 0.0;
  for (const Segment& s : segs.segments) {
    const double d = static_cast<double>(s.length()) / segs.sample_rate;
    if (s.label == SegmentLabel::kSpeech) {
      speech_s += d;
      ++n_speech;
    } else {
      pause_s += d;
      ++n_pause;
    }
  }
  v.n_segments_speech = static_cast<double>(n_speech);
  v.n_segments_disfluency = static_cast<double>(n_pause);
  v.total_pause_s = pause_s;
  if (n_speech > 0) v.mean_segment_s = speech_s / static_cast<double>(n_speech);
  return v;
}

}  // namespace mcivoice
