#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcivoice/audio_io.hpp"
#include "mcivoice/features_classical.hpp"
#include "mcivoice/features_nonlinear.hpp"
#include "mcivoice/features_perceptual.hpp"
#include "mcivoice/segmentation.hpp"

namespace mcivoice {

struct Functionals {
  double mean = kSentinel;
  double median = kSentinel;
  double min = kSentinel;
  double max = kSentinel;
  double mode = kSentinel;
  double std = kSentinel;
};

inline constexpr std::array<const char*, 6> kFunctionalNames = {"mean", "median", "min",
                                                                 "max",  "mode",   "std"};
inline constexpr std::size_t kModeBins = 32;

// NaN entries are ignored; an empty (or all-NaN) series yields all sentinels.
Functionals functionals(std::span<const double> series);

// Families that can be switched off; a disabled family contributes no columns.
struct FeatureToggles {
  bool classical = true;
  bool pitch = true;
  bool formants = true;
  bool mfcc = true;
  bool lpcc = true;
  bool plp = true;
  bool deltas = true;
  bool perturbation = true;
  bool harmonicity = true;
  bool voicing = true;
  bool nonlinear = true;
};

// Everything the extractors need, with the documented defaults.
struct FeatureConfig {
  FeatureToggles enable;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  PitchConfig pitch;
  FormantConfig formant;
  MfccConfig mfcc;
  LpccConfig lpcc;
  PlpConfig plp;
  std::size_t delta_width = 2;
  NonlinearConfig nonlinear;
};

struct NamedFeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::string id;
  int label = -1;  // -1 when unlabelled

  std::size_t size() const { return values.size(); }
};

// Ordered feature names for one stream block ("speech" or "disfluency").
std::vector<std::string> stream_feature_names(const std::string& stream, const FeatureConfig& cfg);
// Full inventory: speech block followed by disfluency block.
std::vector<std::string> feature_inventory(const FeatureConfig& cfg);

// Features of one stream, in stream_feature_names order. A stream shorter
// than one frame produces an all-sentinel block.
std::vector<double> stream_features(const AudioSignal& stream, const SegmentList* segs,
                                    const FeatureConfig& cfg);

// Throws kEmptyStreams when both streams are empty.
NamedFeatureVector assemble(const AudioSignal& speech, const AudioSignal& disfluency,
                            const SegmentList& segs, const FeatureConfig& cfg = {});

}  // namespace mcivoice
