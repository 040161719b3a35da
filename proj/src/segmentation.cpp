#include "mcivoice/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {

struct Run {
  std::size_t begin;
  std::size_t end;
  bool active;
};

std::vector<Run> runs_of(const std::vector<bool>& mask) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < mask.size();) {
    std::size_t j = i;
    while (j < mask.size() && mask[j] == mask[i]) ++j;
    runs.push_back({i, j, mask[i]});
    i = j;
  }
  return runs;
}

void fill(std::vector<bool>& mask, const Run& r, bool value) {
  for (std::size_t i = r.begin; i < r.end; ++i) mask[i] = value;
}

// Interior inactive runs of at most max_len frames become active.
void bridge_gaps(std::vector<bool>& mask, std::size_t max_len) {
  const auto runs = runs_of(mask);
  for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
    const Run& r = runs[k];
    if (!r.active && r.end - r.begin <= max_len) fill(mask, r, true);
  }
}

double frame_energy(const std::vector<double>& f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return s / static_cast<double>(f.size());
}

double frame_zcr(const std::vector<double>& f) {
  if (f.size() < 2) return 0.0;
  std::size_t n = 0;
  for (std::size_t i = 1; i < f.size(); ++i) n += (f[i] >= 0.0) != (f[i - 1] >= 0.0);
  return static_cast<double>(n) / static_cast<double>(f.size() - 1);
}

}  // namespace

const char* to_string(SegmentLabel label) {
  return label == SegmentLabel::kSpeech ? "speech" : "disfluency";
}

std::vector<bool> vad_raw_decisions(const FrameSequence& frames, const VadConfig& cfg) {
  const std::size_t n = frames.size();
  std::vector<double> energy(n);
  std::vector<double> zcr(n);
  for (std::size_t i = 0; i < n; ++i) {
    energy[i] = frame_energy(frames.frames[i]);
    zcr[i] = frame_zcr(frames.frames[i]);
  }
  std::vector<double> sorted = energy;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t quiet = std::max<std::size_t>(1, n / 10);
  const double floor_est =
      std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(quiet), 0.0) /
      static_cast<double>(quiet);
  const double noise_floor = std::min(floor_est, cfg.max_noise_floor);
  const double threshold = cfg.energy_threshold_factor * noise_floor;

  std::vector<bool> active(n);
  for (std::size_t i = 0; i < n; ++i) {
    active[i] = energy[i] > threshold && zcr[i] < cfg.zcr_threshold;
  }
  return active;
}

SegmentList vad(const AudioSignal& sig, const VadConfig& cfg) {
  if (!(cfg.frame_ms > 0) || !(cfg.hop_ms > 0) || !(cfg.energy_threshold_factor > 0) ||
      !(cfg.zcr_threshold > 0) || !(cfg.min_segment_ms > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "VAD parameters must be positive");
  }
  const std::size_t frame_len = ms_to_samples(cfg.frame_ms, sig.sample_rate);
  if (sig.size() < frame_len || sig.empty()) {
    throw Error(ErrorCode::kSignalTooShort, "signal shorter than one VAD frame");
  }
  const FrameSequence frames = frame(sig, cfg.frame_ms, cfg.hop_ms);
  std::vector<bool> active = vad_raw_decisions(frames, cfg);

  // Offline hangover: an active run is held through dips of up to
  // hangover_frames, but never extended into a following pause.
  bridge_gaps(active, cfg.hangover_frames);

  const auto min_frames = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.min_segment_ms / cfg.hop_ms)));
  bridge_gaps(active, min_frames - 1);
  for (const Run& r : runs_of(active)) {
    if (r.active && r.end - r.begin < min_frames) fill(active, r, false);
  }
  auto runs = runs_of(active);
  if (runs.size() > 1) {
    const Run& first = runs.front();
    const Run& last = runs.back();
    if (!first.active && first.end - first.begin < min_frames) fill(active, first, true);
    if (!last.active && last.end - last.begin < min_frames) fill(active, last, true);
    runs = runs_of(active);
  }

  // Frame runs -> sample intervals; boundaries sit midway between the centres
  // of the two frames either side of a transition.
  const std::size_t n = sig.size();
  const double half_gap = 0.5 * static_cast<double>(frames.frame_len - frames.hop);
  SegmentList out;
  out.total_samples = n;
  out.sample_rate = sig.sample_rate;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::size_t end = n;
    if (k + 1 < runs.size()) {
      const double b = static_cast<double>(runs[k].end * frames.hop) + half_gap;
      end = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(b)));
    }
    if (end <= cursor) continue;
    const SegmentLabel label = runs[k].active ? SegmentLabel::kSpeech : SegmentLabel::kDisfluency;
    if (!out.segments.empty() && out.segments.back().label == label) {
      out.segments.back().end = end;
    } else {
      out.segments.push_back({cursor, end, label});
    }
    cursor = end;
  }
  return out;
}

void validate(const SegmentList& segs) {
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < segs.segments.size(); ++k) {
    const Segment& s = segs.segments[k];
    if (s.start != cursor || s.end <= s.start) {
      throw Error(ErrorCode::kInvalidArgument, "segments must be contiguous and non-empty");
    }
    if (k > 0 && segs.segments[k - 1].label == s.label) {
      throw Error(ErrorCode::kInvalidArgument, "adjacent segments share a label");
    }
    cursor = s.end;
  }
  if (cursor != segs.total_samples) {
    throw Error(ErrorCode::kInvalidArgument, "segments do not cover the signal");
  }
}

std::pair<AudioSignal, AudioSignal> split_streams(const AudioSignal& sig,
                                                  const SegmentList& segs) {
  if (segs.total_samples != sig.size()) {
    throw Error(ErrorCode::kInvalidArgument, "segment list does not match signal length");
  }
  validate(segs);
  AudioSignal speech{{}, sig.sample_rate};
  AudioSignal disfluency{{}, sig.sample_rate};
  for (const Segment& s : segs.segments) {
    auto& dst = s.label == SegmentLabel::kSpeech ? speech.samples : disfluency.samples;
    dst.insert(dst.end(), sig.samples.begin() + static_cast<std::ptrdiff_t>(s.start),
               sig.samples.begin() + static_cast<std::ptrdiff_t>(s.end));
  }
  return {std::move(speech), std::move(disfluency)};
}

std::string segments_to_csv(const SegmentList& segs, const std::string& config_hash) {
  std::ostringstream os;
  if (!config_hash.empty()) os << "# config=" << config_hash << '\n';
  os << "start_s,end_s,label\n";
  char buf[96];
  const double rate = segs.sample_rate;
  for (const Segment& s : segs.segments) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%s\n", static_cast<double>(s.start) / rate,
                  static_cast<double>(s.end) / rate, to_string(s.label));
    os << buf;
  }
  return os.str();
}

void write_segments_csv(const std::filesystem::path& path, const SegmentList& segs,
                        const std::string& config_hash) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << segments_to_csv(segs, config_hash);
}

SegmentList read_segments_csv(const std::filesystem::path& path, int sample_rate,
                              std::size_t total_samples) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kFileUnreadable, "cannot open " + path.string());
  SegmentList out;
  out.sample_rate = sample_rate;
  out.total_samples = total_samples;
  std::string line;
  bool header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line.rfind("start_s", 0) == 0) continue;
    }
    std::istringstream ls(line);
    std::string a, b, label;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, label)) {
      throw Error(ErrorCode::kMalformedCsv, "bad segment row: " + line);
    }
    Segment s;
    try {
      s.start = static_cast<std::size_t>(std::llround(std::stod(a) * sample_rate));
      s.end = static_cast<std::size_t>(std::llround(std::stod(b) * sample_rate));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedCsv, "bad segment row: " + line);
    }
    if (label == "speech") {
      s.label = SegmentLabel::kSpeech;
    } else if (label == "disfluency") {
      s.label = SegmentLabel::kDisfluency;
    } else {
      throw Error(ErrorCode::kUnknownLabel, "unknown segment label: " + label);
    }
    out.segments.push_back(s);
  }
  return out;
}

}  // namespace mcivoice
