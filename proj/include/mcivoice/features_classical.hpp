#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mcivoice/audio_io.hpp"
#include "mcivoice/segmentation.hpp"

namespace mcivoice {

inline constexpr double kSentinel = std::numeric_limits<double>::quiet_NaN();

struct FrameDescriptors {
  double short_time_energy = 0.0;
  double intensity_db = 0.0;
  double zcr = 0.0;
  double spectral_centroid = 0.0;
};

FrameDescriptors frame_descriptors(std::span<const double> frame, int rate);

struct PitchConfig {
  double f0_min = 60.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.45;
  // Among autocorrelation peaks within this fraction of the best one, the
  // shortest lag wins; suppresses sub-octave picks on strongly periodic input.
  double octave_tolerance = 0.05;
};

// f0 per frame in Hz; 0 marks an unvoiced frame.
struct PitchTrack {
  std::vector<double> f0;
  std::vector<double> strength;  // normalised autocorrelation at the chosen lag
  std::vector<double> times;     // frame centres, seconds
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  int sample_rate = kCanonicalRate;

  std::size_t size() const { return f0.size(); }
  bool voiced(std::size_t i) const { return f0[i] > 0.0; }
  std::size_t voiced_count() const;
};

PitchTrack pitch_track(const FrameSequence& frames, const PitchConfig& cfg = {});

struct Perturbation {
  double jitter_local = kSentinel;
  double shimmer_local = kSentinel;
  double apq = kSentinel;
};

// Mean absolute consecutive difference over the mean; NaN with < 2 values.
double jitter_local(std::span<const double> periods);
double shimmer_local(std::span<const double> amplitudes);
// Five-point amplitude perturbation quotient; NaN with < 5 values.
double apq5(std::span<const double> amplitudes);

struct PeriodMarks {
  // One entry per contiguous voiced stretch; each holds refined peak
  // positions (samples) and peak amplitudes.
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> amplitudes;
};

PeriodMarks period_marks(const AudioSignal& sig, const PitchTrack& track);
Perturbation perturbation(const AudioSignal& sig, const PitchTrack& track);

struct Harmonicity {
  double hnr_db = kSentinel;
  double nhr = kSentinel;
  double harmonicity_mean = kSentinel;
};

// HNR of one frame from its correlation r at the pitch lag (clamped).
double frame_hnr_db(double r);
// Normalised autocorrelation at a fractional lag, refined to the local peak.
double correlation_at_lag(std::span<const double> frame, double lag);

Harmonicity harmonicity(const FrameSequence& frames, const PitchTrack& track);
// Same statistic with every frame forced voiced at a fixed lag.
Harmonicity harmonicity_at_lag(const FrameSequence& frames, double lag);

struct FormantTrack {
  std::vector<double> f1, f2, f3;
  std::vector<std::size_t> frame_index;
  std::size_t size() const { return f1.size(); }
};

std::size_t default_lpc_order(int rate);

struct FormantConfig {
  std::size_t lpc_order = 0;  // 0 selects default_lpc_order(rate)
  double max_bandwidth_hz = 400.0;
  double min_frequency_hz = 90.0;
  double pre_emphasis = 0.97;
};

// Candidate formant frequencies (ascending) from one frame's LPC roots.
std::vector<double> frame_formants(std::span<const double> frame, int rate,
                                   const FormantConfig& cfg = {});

// Analyses frames flagged voiced in `track`, or all non-silent frames when
// track is null. Frames with fewer than three qualifying roots are skipped.
FormantTrack formant_track(const FrameSequence& frames, const PitchTrack* track,
                           const FormantConfig& cfg = {});

struct VoicingProfile {
  double voiced_frames = 0.0;
  double unvoiced_frames = 0.0;
  double voiced_fraction = kSentinel;
  double n_breaks = 0.0;
  double mean_segment_s = kSentinel;
  double n_segments_speech = 0.0;
  double n_segments_disfluency = 0.0;
  double total_pause_s = 0.0;
};

VoicingProfile voicing_profile(const PitchTrack& track, const SegmentList& segs);

}  // namespace mcivoice
