#include "mcivoice/feature_assembly.hpp"

#include <algorithm>
#include <cmath>

#include "mcivoice/error.hpp"

namespace mcivoice {

Functionals functionals(std::span<const double> series) {
  std::vector<double> v;
  v.reserve(series.size());
  for (double x : series)
    if (!std::isnan(x)) v.push_back(x);
  Functionals f;
  if (v.empty()) return f;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  f.mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - f.mean) * (x - f.mean);
  f.std = std::sqrt(ss / n);
  f.min = v.front();
  f.max = v.back();
  const std::size_t m = v.size() / 2;
  f.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  const double width = (f.max - f.min) / static_cast<double>(kModeBins);
  if (!(width > 0.0)) {
    f.mode = f.min;
  } else {
    std::array<std::size_t, kModeBins> counts{};
    for (double x : v) {
      const auto b = static_cast<std::size_t>((x - f.min) / width);
      ++counts[std::min(b, kModeBins - 1)];
    }
    const auto best = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    f.mode = f.min + (static_cast<double>(best) + 0.5) * width;
  }
  return f;
}

namespace {

// Collects (name, value) pairs. With no signal the same code path records
// names only, so the inventory and the values can never drift apart.
class Sink {
 public:
  explicit Sink(std::string prefix) : prefix_(std::move(prefix)) {}

  void scalar(const std::string& family, const std::string& feature, double value) {
    names_.push_back(prefix_ + family + "." + feature + ".value");
    values_.push_back(value);
  }

  void track(const std::string& family, const std::string& feature,
             std::span<const double> series, bool full) {
    const Functionals f = functionals(series);
    const double all[6] = {f.mean, f.median, f.min, f.max, f.mode, f.std};
    for (std::size_t i = 0; i < 6; ++i) {
      if (!full && i != 0 && i != 5) continue;
      names_.push_back(prefix_ + family + "." + feature + "." + kFunctionalNames[i]);
      values_.push_back(all[i]);
    }
  }

  std::vector<std::string>& names() { return names_; }
  std::vector<double>& values() { return values_; }

 private:
  std::string prefix_;
  std::vector<std::string> names_;
  std::vector<double> values_;
};

void emit_coeffs(Sink& sink, const std::string& family, const CoeffTrack* track,
                 std::size_t n_coeffs, bool full) {
  for (std::size_t c = 0; c < n_coeffs; ++c) {
    std::vector<double> col;
    if (track != nullptr) col = track->values.column(c);
    sink.track(family, "c" + std::to_string(c), col, full);
  }
}

void emit_stream(Sink& sink, const AudioSignal* sig, const SegmentList* segs, bool speech_block,
                 const FeatureConfig& cfg) {
  const bool have = sig != nullptr;
  FrameSequence frames;
  PitchTrack pitch;
  if (have) {
    frames = frame(*sig, cfg.frame_ms, cfg.hop_ms);
    pitch = pitch_track(frames, cfg.pitch);
  }

  const FeatureToggles& on = cfg.enable;
  std::vector<double> energy, intensity, zcr, centroid;
  if (have && on.classical) {
    for (const auto& f : frames.frames) {
      const auto d = frame_descriptors(f, frames.sample_rate);
      energy.push_back(d.short_time_energy);
      intensity.push_back(d.intensity_db);
      zcr.push_back(d.zcr);
      centroid.push_back(d.spectral_centroid);
    }
  }
  if (on.classical) {
    sink.track("classical", "energy", energy, true);
    sink.track("classical", "intensity_db", intensity, true);
    sink.track("classical", "zcr", zcr, true);
    sink.track("classical", "centroid", centroid, true);
  }

  std::vector<double> voiced_f0;
  if (have) {
    for (double f0 : pitch.f0)
      if (f0 > 0.0) voiced_f0.push_back(f0);
  }
  if (on.pitch) sink.track("pitch", "f0", voiced_f0, true);

  if (on.formants) {
    FormantTrack formants;
    if (have) formants = formant_track(frames, &pitch, cfg.formant);
    sink.track("formant", "f1", formants.f1, true);
    sink.track("formant", "f2", formants.f2, true);
    sink.track("formant", "f3", formants.f3, true);
  }

  CoeffTrack mf, lp, pl;
  if (have) {
    if (on.mfcc) mf = mfcc(frames, cfg.mfcc);
    if (on.lpcc) lp = lpcc(frames, cfg.lpcc);
    if (on.plp) pl = plp(frames, cfg.plp);
  }
  struct Family {
    const char* name;
    const CoeffTrack* track;
    std::size_t n;
  };
  std::vector<Family> families;
  if (on.mfcc) families.push_back({"mfcc", &mf, cfg.mfcc.n_coeffs});
  if (on.lpcc) families.push_back({"lpcc", &lp, cfg.lpcc.n_coeffs});
  if (on.plp) families.push_back({"plp", &pl, cfg.plp.n_coeffs});
  for (const auto& fam : families) {
    emit_coeffs(sink, fam.name, have ? fam.track : nullptr, fam.n, true);
  }
  for (const auto& fam : families) {
    if (!on.deltas) break;
    if (have) {
      const auto [d1, d2] = deltas(*fam.track, cfg.delta_width);
      emit_coeffs(sink, std::string(fam.name) + "_delta", &d1, fam.n, false);
      emit_coeffs(sink, std::string(fam.name) + "_delta2", &d2, fam.n, false);
    } else {
      emit_coeffs(sink, std::string(fam.name) + "_delta", nullptr, fam.n, false);
      emit_coeffs(sink, std::string(fam.name) + "_delta2", nullptr, fam.n, false);
    }
  }

  Perturbation pert;
  Harmonicity harm;
  if (have) {
    if (on.perturbation) pert = perturbation(*sig, pitch);
    if (on.harmonicity) harm = harmonicity(frames, pitch);
  }
  if (on.perturbation) {
    sink.scalar("perturbation", "jitter_local", pert.jitter_local);
    sink.scalar("perturbation", "shimmer_local", pert.shimmer_local);
    sink.scalar("perturbation", "apq5", pert.apq);
  }
  if (on.harmonicity) {
    sink.scalar("harmonicity", "hnr_db", harm.hnr_db);
    sink.scalar("harmonicity", "nhr", harm.nhr);
    sink.scalar("harmonicity", "harmonicity_mean", harm.harmonicity_mean);
  }

  const SegmentList empty_segs;
  VoicingProfile vp{kSentinel, kSentinel, kSentinel, kSentinel,
                    kSentinel, kSentinel, kSentinel, kSentinel};
  if (have) vp = voicing_profile(pitch, segs != nullptr ? *segs : empty_segs);
  if (on.voicing) {
    sink.scalar("voicing", "voiced_frames", vp.voiced_frames);
    sink.scalar("voicing", "unvoiced_frames", vp.unvoiced_frames);
    sink.scalar("voicing", "voiced_fraction", vp.voiced_fraction);
    sink.scalar("voicing", "n_breaks", vp.n_breaks);
  }
  if (speech_block && on.voicing) {
    sink.scalar("segments", "n_segments_speech", vp.n_segments_speech);
    sink.scalar("segments", "n_segments_disfluency", vp.n_segments_disfluency);
    sink.scalar("segments", "total_pause_s", vp.total_pause_s);
    sink.scalar("segments", "mean_segment_s", vp.mean_segment_s);
  }

  if (!on.nonlinear) return;
  NonlinearSummary nl;
  nl.shannon_entropy = kSentinel;
  nl.higuchi_fd = kSentinel;
  nl.mspe.assign(cfg.nonlinear.pe_scales, kSentinel);
  if (have) nl = nonlinear_summary(sig->samples, cfg.nonlinear);
  sink.scalar("nonlinear", "shannon_entropy", nl.shannon_entropy);
  sink.scalar("nonlinear", "higuchi_fd", nl.higuchi_fd);
  for (std::size_t s = 0; s < nl.mspe.size(); ++s) {
    sink.scalar("nonlinear", "mspe_s" + std::to_string(s + 1), nl.mspe[s]);
  }
}

bool usable(const AudioSignal& sig, const FeatureConfig& cfg) {
  return !sig.empty() && sig.size() >= ms_to_samples(cfg.frame_ms, sig.sample_rate);
}

}  // namespace

std::vector<std::string> stream_feature_names(const std::string& stream, const FeatureConfig& cfg) {
  Sink sink(stream + ".");
  emit_stream(sink, nullptr, nullptr, stream == "speech", cfg);
  return std::move(sink.names());
}

std::vector<std::string> feature_inventory(const FeatureConfig& cfg) {
  auto names = stream_feature_names("speech", cfg);
  auto dis = stream_feature_names("disfluency", cfg);
  names.insert(names.end(), dis.begin(), dis.end());
  return names;
}

std::vector<double> stream_features(const AudioSignal& stream, const SegmentList* segs,
                                    const FeatureConfig& cfg) {
  const bool speech_block = segs != nullptr;
  Sink sink("");
  emit_stream(sink, usable(stream, cfg) ? &stream : nullptr, segs, speech_block, cfg);
  return std::move(sink.values());
}

NamedFeatureVector assemble(const AudioSignal& speech, const AudioSignal& disfluency,
                            const SegmentList& segs, const FeatureConfig& cfg) {
  if (!usable(speech, cfg) && !usable(disfluency, cfg)) {
    throw Error(ErrorCode::kEmptyStreams, "both speech and disfluency streams are empty");
  }
  NamedFeatureVector out;
  out.names = feature_inventory(cfg);
  out.values = stream_features(speech, &segs, cfg);
  const auto dis = stream_features(disfluency, nullptr, cfg);
  out.values.insert(out.values.end(), dis.begin(), dis.end());
  return out;
}

}  // namespace mcivoice
