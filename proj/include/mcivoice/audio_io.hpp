#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mcivoice {

inline constexpr int kCanonicalRate = 22050;

// Mono samples in [-1, 1] plus their sample rate in Hz.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kCanonicalRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Fixed-length analysis windows cut from a signal. The last frame is
// zero-padded when the signal does not end on the hop grid.
struct FrameSequence {
  std::vector<std::vector<double>> frames;
  std::vector<std::size_t> offsets;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  int sample_rate = kCanonicalRate;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  // Centre of frame i in seconds.
  double time_of(std::size_t i) const {
    return (static_cast<double>(offsets[i]) + 0.5 * static_cast<double>(frame_len)) /
           sample_rate;
  }
};

// PCM16 RIFF/WAVE reader. Stereo is averaged to mono, codes scaled by 1/32768.
// Throws Error with kFileUnreadable, kNotPcm, kUnsupportedFormat or kEmptyAudio.
AudioSignal read_wav(const std::filesystem::path& path);

// Writes mono PCM16. Samples are clamped to [-1, 1) before quantisation.
// A non-empty comment is stored in a LIST/INFO ICMT chunk.
void write_wav(const std::filesystem::path& path, const AudioSignal& sig,
               const std::string& comment = {});

// Linear-interpolation resampling to target_rate.
AudioSignal resample(const AudioSignal& sig, int target_rate);

// Samples per window for a duration in milliseconds at the given rate.
std::size_t ms_to_samples(double ms, int rate);

// Frame count = ceil(max(0, N - frame_len) / hop) + 1.
FrameSequence frame(const AudioSignal& sig, double frame_ms, double hop_ms);
FrameSequence frame_samples(std::span<const double> samples, int rate,
                            std::size_t frame_len, std::size_t hop);

}  // namespace mcivoice
