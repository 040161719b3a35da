#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcivoice/audio_io.hpp"
#include "mcivoice/matrix.hpp"

namespace mcivoice {

enum class CoeffFamily { kMfcc, kLpcc, kPlp, kDelta, kDeltaDelta };

const char* to_string(CoeffFamily family);

// frames x n_coeffs coefficient matrix.
struct CoeffTrack {
  Matrix values;
  CoeffFamily family = CoeffFamily::kMfcc;
  std::vector<std::string> names;

  std::size_t frames() const { return values.rows; }
  std::size_t coeffs() const { return values.cols; }
};

struct MfccConfig {
  std::size_t n_mels = 26;
  std::size_t n_coeffs = 13;
  double pre_emphasis = 0.97;
  double log_floor = 1e-10;
};

// Triangular mel filterbank over 0..rate/2; rows are filters, columns FFT bins.
Matrix mel_filterbank(std::size_t n_mels, std::size_t nfft, int rate);
double hz_to_mel(double hz);
double mel_to_hz(double mel);

CoeffTrack mfcc(const FrameSequence& frames, const MfccConfig& cfg = {});

struct LpccConfig {
  std::size_t lpc_order = 12;
  std::size_t n_coeffs = 13;
};

// Additive floor on r[0]; a silent frame yields c0 = ln(floor), c1.. = 0.
inline constexpr double kAutocorrFloor = 1e-10;

CoeffTrack lpcc(const FrameSequence& frames, const LpccConfig& cfg = {});

struct PlpConfig {
  std::size_t model_order = 12;
  std::size_t n_coeffs = 13;
};

double hz_to_bark(double hz);
// Hermansky equal-loudness weight at frequency hz.
double equal_loudness(double hz);

CoeffTrack plp(const FrameSequence& frames, const PlpConfig& cfg = {});

// Regression deltas over +-width frames with edge replication; returns (delta, delta-delta).
std::pair<CoeffTrack, CoeffTrack> deltas(const CoeffTrack& track, std::size_t width = 2);

}  // namespace mcivoice
