#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mcivoice/audio_io.hpp"

namespace mcivoice {

enum class SegmentLabel { kSpeech, kDisfluency };

const char* to_string(SegmentLabel label);

struct Segment {
  std::size_t start = 0;  // sample index, inclusive
  std::size_t end = 0;    // sample index, exclusive
  SegmentLabel label = SegmentLabel::kDisfluency;

  std::size_t length() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

// Sorted, contiguous, maximal runs covering [0, N).
struct SegmentList {
  std::vector<Segment> segments;
  std::size_t total_samples = 0;
  int sample_rate = kCanonicalRate;

  bool operator==(const SegmentList&) const = default;
};

struct VadConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double energy_threshold_factor = 3.0;
  double zcr_threshold = 0.35;
  std::size_t hangover_frames = 5;
  double min_segment_ms = 100.0;
  // Noise-floor estimates above this mean-square level are treated as
  // programme material rather than noise; keeps steady full-scale tones active.
  double max_noise_floor = 1e-4;
};

// Energy + zero-crossing voice activity detection.
SegmentList vad(const AudioSignal& sig, const VadConfig& cfg = {});

// Per-frame activity before any smoothing, exposed for tests and diagnostics.
std::vector<bool> vad_raw_decisions(const FrameSequence& frames, const VadConfig& cfg);

// Concatenates speech-labelled and disfluency-labelled samples, in order.
std::pair<AudioSignal, AudioSignal> split_streams(const AudioSignal& sig,
                                                  const SegmentList& segs);

// Throws kInvalidArgument unless segs is a valid partition of [0, N).
void validate(const SegmentList& segs);

// CSV with header start_s,end_s,label; seconds printed with 6 decimals.
std::string segments_to_csv(const SegmentList& segs, const std::string& config_hash = {});
void write_segments_csv(const std::filesystem::path& path, const SegmentList& segs,
                        const std::string& config_hash = {});
SegmentList read_segments_csv(const std::filesystem::path& path, int sample_rate,
                              std::size_t total_samples);

}  // namespace mcivoice
