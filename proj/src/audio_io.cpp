#include "mcivoice/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

AudioSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kFileUnreadable, path.string() + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || avail < 16) {
        throw Error(ErrorCode::kFileUnreadable, path.string() + ": truncated fmt chunk");
      }
      std::uint16_t format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible && len >= 26 && avail >= 26) {
        format = read_u16(bytes.data() + body + 24);
      }
      if (format != kFormatPcm) {
        throw Error(ErrorCode::kNotPcm, path.string() + ": encoding is not PCM");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min<std::size_t>(len, avail);
    }
    pos = body + len + (len & 1u);
  }

  if (!have_fmt || data == nullptr) {
    throw Error(ErrorCode::kFileUnreadable, path.string() + ": missing fmt or data chunk");
  }
  if (bits != 16 || channels < 1 || channels > 2 || rate == 0) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": only 16-bit mono/stereo PCM is supported");
  }
  const std::size_t frame_bytes = 2u * channels;
  const std::size_t n = data_len / frame_bytes;
  if (n == 0) throw Error(ErrorCode::kEmptyAudio, path.string() + ": no samples");

  AudioSignal sig;
  sig.sample_rate = static_cast<int>(rate);
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto code = static_cast<std::int16_t>(read_u16(data + i * frame_bytes + 2 * c));
      acc += static_cast<double>(code) / 32768.0;
    }
    sig.samples[i] = acc / channels;
  }
  return sig;
}

void write_wav(const std::filesystem::path& path, const AudioSignal& sig,
               const std::string& comment) {
  if (sig.sample_rate <= 0) throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  const auto n = static_cast<std::uint32_t>(sig.samples.size());
  std::string info;
  if (!comment.empty()) {
    std::string text = comment;
    text.push_back('\0');
    if (text.size() & 1u) text.push_back('\0');
    info += "LIST";
    put_u32(info, static_cast<std::uint32_t>(4 + 8 + text.size()));
    info += "INFOICMT";
    put_u32(info, static_cast<std::uint32_t>(text.size()));
    info += text;
  }
  std::string out;
  out.reserve(44 + info.size() + 2 * sig.samples.size());
  out += "RIFF";
  put_u32(out, static_cast<std::uint32_t>(36 + info.size() + 2 * n));
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sig.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sig.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += info;
  out += "data";
  put_u32(out, 2 * n);
  for (double x : sig.samples) {
    const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
    const auto code = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(code));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

AudioSignal resample(const AudioSignal& sig, int target_rate) {
  if (target_rate <= 0) throw Error(ErrorCode::kInvalidArgument, "target rate must be positive");
  if (target_rate == sig.sample_rate || sig.empty()) {
    AudioSignal out = sig;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = static_cast<double>(sig.sample_rate) / target_rate;
  const auto n_out = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(sig.size()) / ratio)));
  AudioSignal out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  const std::size_t last = sig.size() - 1;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double t = static_cast<double>(j) * ratio;
    const auto i = static_cast<std::size_t>(t);
    if (i >= last) {
      out.samples[j] = sig.samples[last];
      continue;
    }
    const double frac = t - static_cast<double>(i);
    out.samples[j] = sig.samples[i] + frac * (sig.samples[i + 1] - sig.samples[i]);
  }
  return out;
}

std::size_t ms_to_samples(double ms, int rate) {
  return static_cast<std::size_t>(std::floor(ms * rate / 1000.0 + 1e-9));
}

FrameSequence frame_samples(std::span<const double> samples, int rate, std::size_t frame_len,
                            std::size_t hop) {
  if (hop == 0 || frame_len == 0 || hop > frame_len) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < hop <= frame length");
  }
  if (samples.size() < hop) {
    throw Error(ErrorCode::kSignalTooShort, "signal shorter than one hop");
  }
  const std::size_t n = samples.size();
  const std::size_t excess = n > frame_len ? n - frame_len : 0;
  const std::size_t count = (excess + hop - 1) / hop + 1;

  FrameSequence fs;
  fs.frame_len = frame_len;
  fs.hop = hop;
  fs.sample_rate = rate;
  fs.frames.reserve(count);
  fs.offsets.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * hop;
    std::vector<double> w(frame_len, 0.0);
    const std::size_t avail = std::min(frame_len, n - start);
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), avail, w.begin());
    fs.frames.push_back(std::move(w));
    fs.offsets.push_back(start);
  }
  return fs;
}

FrameSequence frame(const AudioSignal& sig, double frame_ms, double hop_ms) {
  if (!(hop_ms > 0.0) || hop_ms > frame_ms) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < hop_ms <= frame_ms");
  }
  const std::size_t len = ms_to_samples(frame_ms, sig.sample_rate);
  const std::size_t hop = std::max<std::size_t>(1, ms_to_samples(hop_ms, sig.sample_rate));
  return frame_samples(sig.samples, sig.sample_rate, std::max(len, hop), hop);
}

}  // namespace mcivoice
