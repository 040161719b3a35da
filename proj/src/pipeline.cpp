#include "mcivoice/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "json_io.hpp"
#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kInvalidArgument, "invalid value '" + value + "' for " + key);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) bad_value(key, v);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad_value(key, v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  bad_value(key, v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  if (v == "none") return out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<std::size_t>(to_u64(key, item)));
  return out;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_sizes(const std::vector<std::size_t>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

// Single table of settable keys, so get/set/to_text cannot disagree.
std::map<std::string, Field> fields(PipelineConfig& c) {
  std::map<std::string, Field> f;
  auto real = [&f](const std::string& key, double& ref) {
    f[key] = {[&ref] { return fmt_double(ref); },
              [&ref, key](const std::string& v) { ref = to_double(key, v); }};
  };
  auto size = [&f](const std::string& key, std::size_t& ref) {
    f[key] = {[&ref] { return std::to_string(ref); },
              [&ref, key](const std::string& v) { ref = static_cast<std::size_t>(to_u64(key, v)); }};
  };
  auto u64 = [&f](const std::string& key, std::uint64_t& ref) {
    f[key] = {[&ref] { return std::to_string(ref); },
              [&ref, key](const std::string& v) { ref = to_u64(key, v); }};
  };
  auto flag = [&f](const std::string& key, bool& ref) {
    f[key] = {[&ref] { return std::string(ref ? "true" : "false"); },
              [&ref, key](const std::string& v) { ref = to_bool(key, v); }};
  };
  auto sizes = [&f](const std::string& key, std::vector<std::size_t>& ref) {
    f[key] = {[&ref] { return fmt_sizes(ref); },
              [&ref, key](const std::string& v) { ref = to_sizes(key, v); }};
  };

  f["audio.rate"] = {[&c] { return std::to_string(c.sample_rate); },
                     [&c](const std::string& v) {
                       c.sample_rate = static_cast<int>(to_u64("audio.rate", v));
                     }};
  // One framing for both the VAD and the feature extractors.
  f["audio.frame_ms"] = {[&c] { return fmt_double(c.features.frame_ms); },
                         [&c](const std::string& v) {
                           c.features.frame_ms = c.vad.frame_ms = to_double("audio.frame_ms", v);
                         }};
  f["audio.hop_ms"] = {[&c] { return fmt_double(c.features.hop_ms); },
                       [&c](const std::string& v) {
                         c.features.hop_ms = c.vad.hop_ms = to_double("audio.hop_ms", v);
                       }};

  real("vad.threshold_factor", c.vad.energy_threshold_factor);
  real("vad.zcr_threshold", c.vad.zcr_threshold);
  size("vad.hangover_frames", c.vad.hangover_frames);
  real("vad.min_segment_ms", c.vad.min_segment_ms);
  real("vad.max_noise_floor", c.vad.max_noise_floor);

  auto& fe = c.features;
  flag("features.classical", fe.enable.classical);
  flag("features.pitch", fe.enable.pitch);
  flag("features.formants", fe.enable.formants);
  flag("features.mfcc", fe.enable.mfcc);
  flag("features.lpcc", fe.enable.lpcc);
  flag("features.plp", fe.enable.plp);
  flag("features.deltas", fe.enable.deltas);
  flag("features.perturbation", fe.enable.perturbation);
  flag("features.harmonicity", fe.enable.harmonicity);
  flag("features.voicing", fe.enable.voicing);
  flag("features.nonlinear", fe.enable.nonlinear);
  real("pitch.f0_min", fe.pitch.f0_min);
  real("pitch.f0_max", fe.pitch.f0_max);
  real("pitch.voicing_threshold", fe.pitch.voicing_threshold);
  real("pitch.octave_tolerance", fe.pitch.octave_tolerance);
  size("formant.lpc_order", fe.formant.lpc_order);
  real("formant.max_bandwidth_hz", fe.formant.max_bandwidth_hz);
  real("formant.min_frequency_hz", fe.formant.min_frequency_hz);
  real("formant.pre_emphasis", fe.formant.pre_emphasis);
  size("mfcc.n_mels", fe.mfcc.n_mels);
  size("mfcc.n_coeffs", fe.mfcc.n_coeffs);
  real("mfcc.pre_emphasis", fe.mfcc.pre_emphasis);
  size("lpcc.order", fe.lpcc.lpc_order);
  size("lpcc.n_coeffs", fe.lpcc.n_coeffs);
  size("plp.order", fe.plp.model_order);
  size("plp.n_coeffs", fe.plp.n_coeffs);
  size("delta.width", fe.delta_width);
  size("nonlinear.entropy_bins", fe.nonlinear.entropy_bins);
  size("nonlinear.higuchi_k_max", fe.nonlinear.higuchi_k_max);
  size("nonlinear.pe_order", fe.nonlinear.pe_order);
  size("nonlinear.pe_delay", fe.nonlinear.pe_delay);
  size("nonlinear.pe_scales", fe.nonlinear.pe_scales);

  flag("selection.enabled", c.selection.enabled);
  real("selection.alpha", c.selection.alpha);
  size("selection.k", c.selection.k);
  real("selection.batch_fraction", c.selection.rank.batch_fraction);
  size("selection.single_step_tail", c.selection.rank.single_step_tail);
  real("selection.svm_c", c.selection.rank.svm.c);

  f["classifiers"] = {[&c] {
                        std::string out;
                        for (std::size_t i = 0; i < c.classifiers.size(); ++i)
                          out += (i ? "," : "") + std::string(to_string(c.classifiers[i]));
                        return out;
                      },
                      [&c](const std::string& v) {
                        std::vector<ClassifierKind> kinds;
                        for (const auto& item : split_list(v)) kinds.push_back(parse_classifier_kind(item));
                        if (kinds.empty()) bad_value("classifiers", v);
                        c.classifiers = kinds;
                      }};
  size("knn.k", c.knn.k);
  real("svm.c", c.svm.c);
  real("svm.tolerance", c.svm.tolerance);
  size("svm.max_iters", c.svm.max_iters);
  sizes("mlp.hidden", c.mlp.hidden);
  real("mlp.learning_rate", c.mlp.learning_rate);
  size("mlp.epochs", c.mlp.epochs);
  u64("mlp.seed", c.mlp.seed);
  size("cnn.filters", c.cnn.n_filters);
  size("cnn.conv", c.cnn.conv_size);
  size("cnn.pool", c.cnn.pool_size);
  sizes("cnn.dense", c.cnn.dense);
  real("cnn.learning_rate", c.cnn.learning_rate);
  size("cnn.epochs", c.cnn.epochs);
  u64("cnn.seed", c.cnn.seed);

  size("cv.k", c.cv_k);
  size("cv.repeats", c.repeats);
  u64("seed", c.seed);
  f["preprocess"] = {[&c] { return std::string(to_string(c.policy)); },
                     [&c](const std::string& v) {
                       if (v == "per-fold") c.policy = PreprocessPolicy::kPerFold;
                       else if (v == "global") c.policy = PreprocessPolicy::kGlobal;
                       else bad_value("preprocess", v);
                     }};
  return f;
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "threads") {
    threads = static_cast<std::size_t>(to_u64(key, trim(value)));
    return;
  }
  auto table = fields(*this);
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::kInvalidArgument, "unknown config key: " + key);
  it->second.set(trim(value));
}

std::string PipelineConfig::get(const std::string& key) const {
  if (key == "threads") return std::to_string(threads);
  auto table = fields(const_cast<PipelineConfig&>(*this));
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::kInvalidArgument, "unknown config key: " + key);
  return it->second.get();
}

std::vector<std::string> PipelineConfig::keys() {
  PipelineConfig tmp;
  std::vector<std::string> out;
  for (const auto& [k, _] : fields(tmp)) out.push_back(k);
  return out;
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto& [k, field] : fields(const_cast<PipelineConfig&>(*this))) {
    out += k + " = " + field.get() + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string PipelineConfig::hash() const { return to_hex(fnv1a64(to_text())); }

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (sample_rate < 8000) fail("audio.rate must be at least 8000");
  if (!(features.hop_ms > 0.0) || features.hop_ms > features.frame_ms) fail("need 0 < hop_ms <= frame_ms");
  if (!(selection.alpha > 0.0 && selection.alpha <= 1.0)) fail("selection.alpha must be in (0, 1]");
  if (selection.k == 0) fail("selection.k must be positive");
  if (cv_k < 2) fail("cv.k must be at least 2");
  if (repeats == 0) fail("cv.repeats must be positive");
  if (knn.k == 0) fail("knn.k must be positive");
  if (!(svm.c > 0.0)) fail("svm.c must be positive");
  if (!(mlp.learning_rate > 0.0) || !(cnn.learning_rate > 0.0)) fail("learning rates must be positive");
  if (cnn.conv_size == 0 || cnn.pool_size == 0 || cnn.n_filters == 0) fail("cnn sizes must be positive");
  if (!(features.pitch.f0_min > 0.0) || features.pitch.f0_max <= features.pitch.f0_min) {
    fail("need 0 < pitch.f0_min < pitch.f0_max");
  }
  if (features.nonlinear.pe_order < 2) fail("nonlinear.pe_order must be at least 2");
}

ClassifierSpec PipelineConfig::spec_for(ClassifierKind kind) const {
  ClassifierSpec s = ClassifierSpec::of(kind);
  s.knn = knn;
  s.svm = svm;
  s.mlp = mlp;
  s.cnn = cnn;
  return s;
}

CvConfig PipelineConfig::cv_config(std::size_t repeat) const {
  CvConfig cv;
  cv.k = cv_k;
  cv.seed = seed + repeat;
  cv.policy = policy;
  cv.selection = selection;
  return cv;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

PipelineConfig load_config(const std::filesystem::path& file,
                           const std::map<std::string, std::string>& overrides) {
  PipelineConfig cfg;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot open config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(ss.str())) cfg.set(k, v);
  }
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

RecordingAnalysis analyse_recording(const std::filesystem::path& wav, const PipelineConfig& cfg) {
  RecordingAnalysis r;
  r.audio = read_wav(wav);
  if (r.audio.sample_rate != cfg.sample_rate) r.audio = resample(r.audio, cfg.sample_rate);
  r.segments = vad(r.audio, cfg.vad);
  const auto [speech, dis] = split_streams(r.audio, r.segments);
  r.features = assemble(speech, dis, r.segments, cfg.features);
  r.features.id = wav.filename().string();
  return r;
}

SegmentList segment_file(const std::filesystem::path& wav, const PipelineConfig& cfg) {
  AudioSignal sig = read_wav(wav);
  if (sig.sample_rate != cfg.sample_rate) sig = resample(sig, cfg.sample_rate);
  return vad(sig, cfg.vad);
}

std::map<std::string, int> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileUnreadable, "cannot open label file " + path.string());
  std::map<std::string, int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kMalformedCsv, path.string() + ":" + std::to_string(lineno) + ": expected filename,label");
    }
    const std::string name = trim(line.substr(0, comma));
    const std::string label = trim(line.substr(comma + 1));
    if (name == "filename" && label == "label") continue;
    if (labels.count(name)) {
      throw Error(ErrorCode::kMalformedCsv, path.string() + ": duplicate entry for " + name);
    }
    labels[name] = static_cast<int>(parse_label(label));
  }
  return labels;
}

namespace {

bool is_wav(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".wav";
}

}  // namespace

ExtractResult extract_directory(const std::filesystem::path& dir,
                                const std::filesystem::path& label_file,
                                const PipelineConfig& cfg, bool skip_bad) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kFileUnreadable, dir.string() + " is not a directory");
  }
  const auto labels = read_label_file(label_file);
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_wav(entry.path())) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());

  ExtractResult result;
  std::vector<std::string> todo;
  for (const auto& n : names) {
    if (labels.count(n)) todo.push_back(n);
    else result.problems.push_back(n + ": no label");
  }
  for (const auto& [n, _] : labels) {
    if (!std::binary_search(names.begin(), names.end(), n)) result.problems.push_back(n + ": labelled but missing");
  }

  struct Slot {
    std::vector<double> values;
    std::string error;
  };
  std::vector<Slot> slots(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        slots[i].values = analyse_recording(dir / todo[i], cfg).features.values;
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, std::max<std::size_t>(1, todo.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  Dataset& ds = result.dataset;
  ds.feature_names = feature_inventory(cfg.features);
  ds.config_hash = cfg.hash();
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (!slots[i].error.empty()) result.problems.push_back(todo[i] + ": " + slots[i].error);
    else good.push_back(i);
  }
  if (!result.problems.empty() && !skip_bad) {
    std::string msg = "extraction failed for " + std::to_string(result.problems.size()) + " file(s):";
    for (const auto& p : result.problems) msg += "\n  " + p;
    throw Error(ErrorCode::kIo, msg);
  }
  if (good.empty()) throw Error(ErrorCode::kIo, "no recordings extracted from " + dir.string());
  ds.x = Matrix(good.size(), ds.feature_names.size());
  for (std::size_t r = 0; r < good.size(); ++r) {
    const auto& slot = slots[good[r]];
    std::copy(slot.values.begin(), slot.values.end(), ds.x.row(r).begin());
    ds.ids.push_back(todo[good[r]]);
    ds.labels.push_back(labels.at(todo[good[r]]));
  }
  validate(ds);
  return result;
}

Funnel compute_funnel(const Dataset& ds, const SelectionParams& params) {
  const Preprocessor pre = fit_preprocessor(ds, params);
  return {ds.n_features(), pre.n_utest(), pre.n_final()};
}

std::string funnel_line(const Funnel& f) {
  return std::to_string(f.d_initial) + " → " + std::to_string(f.d_utest) + " → " +
         std::to_string(f.d_final);
}

RunResult run_pipeline(const Dataset& ds, const PipelineConfig& cfg) {
  RunResult out;
  try {
    out.funnel = compute_funnel(ds, cfg.selection);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("select: ") + e.what());
  }
  for (const auto kind : cfg.classifiers) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      try {
        out.reports.push_back(cross_validate(ds, cfg.spec_for(kind), cfg.cv_config(r)));
      } catch (const Error& e) {
        throw Error(e.code(), std::string("evaluate ") + to_string(kind) + ": " + e.what());
      }
    }
  }
  return out;
}

std::string run_result_json(const RunResult& result, const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  const std::string hash = cfg.hash();
  j["config_hash"] = hash;
  nlohmann::ordered_json echo;
  for (const auto& key : PipelineConfig::keys()) echo[key] = cfg.get(key);
  j["config"] = std::move(echo);
  j["funnel"] = {{"d_initial", result.funnel.d_initial},
                 {"d_utest", result.funnel.d_utest},
                 {"d_final", result.funnel.d_final}};
  auto reports = nlohmann::ordered_json::array();
  for (const auto& r : result.reports) reports.push_back(detail::report_json(r, {}));
  j["reports"] = std::move(reports);
  return j.dump(2) + "\n";
}

// ---- synthetic corpus ----

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Portable draws: std::normal_distribution differs between standard libraries.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

constexpr double kMinPart = 0.15;  // seconds; keeps every part above the VAD minimum
constexpr double kEdgeSilence = 0.2;

std::vector<double> voiced_burst(std::size_t n, int rate, const SynthClassParams& p, Draw& d) {
  std::vector<double> src(n);
  const double f0 = p.f0_mean_hz * (1.0 + 0.08 * d.normal());
  double phase = 0.0;
  double period = rate / f0;
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = 1.0 - 2.0 * phase;
    phase += 1.0 / period;
    if (phase >= 1.0) {
      phase -= 1.0;
      period = rate / f0 * std::max(0.5, 1.0 + p.f0_jitter * d.normal());
    }
  }
  const double formants[3] = {700.0 * (1.0 + 0.1 * d.normal()), 1220.0 * (1.0 + 0.1 * d.normal()),
                              2600.0 * (1.0 + 0.05 * d.normal())};
  const double bandwidths[3] = {80.0, 90.0, 120.0};
  std::vector<double> y = src;
  for (int k = 0; k < 3; ++k) {
    const double r = std::exp(-std::numbers::pi * bandwidths[k] / rate);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * formants[k] / rate);
    const double a2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (1.0 - r) * y[i] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = v;
      y[i] = v;
    }
  }
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  const double amp = std::clamp(0.4 * (1.0 + 0.15 * d.normal()), 0.2, 0.7);
  const auto fade = static_cast<std::size_t>(0.010 * rate);
  for (std::size_t i = 0; i < n; ++i) {
    double g = amp / (peak > 0.0 ? peak : 1.0);
    if (i < fade) g *= static_cast<double>(i) / fade;
    if (n - 1 - i < fade) g *= static_cast<double>(n - 1 - i) / fade;
    y[i] *= g;
  }
  return y;
}

}  // namespace

SynthRecording synth_recording(const SynthClassParams& p, double duration_s, int rate,
                               std::uint64_t seed) {
  Draw d(seed);
  // Alternate speech and pause durations in seconds, edges silent.
  std::vector<std::pair<double, SegmentLabel>> parts;
  const double inner = duration_s - 2.0 * kEdgeSilence;
  parts.push_back({kEdgeSilence, SegmentLabel::kDisfluency});
  double t = 0.0;
  // One burst plus one pause per 1/rate seconds on average.
  const double burst_mean = std::max(2 * kMinPart, 1.0 / p.pause_rate_hz - p.pause_mean_s);
  while (true) {
    double burst = std::max(kMinPart * 2, burst_mean * d.uniform(0.7, 1.3));
    if (t + burst + kMinPart * 2 >= inner) {
      parts.push_back({inner - t, SegmentLabel::kSpeech});
      break;
    }
    parts.push_back({burst, SegmentLabel::kSpeech});
    t += burst;
    double pause = std::max(kMinPart, p.pause_mean_s + p.pause_sd_s * d.normal());
    if (t + pause + kMinPart * 2 >= inner) {
      // Not enough room for another burst; stretch the last one instead.
      parts.back().first += inner - t;
      break;
    }
    parts.push_back({pause, SegmentLabel::kDisfluency});
    t += pause;
  }
  parts.push_back({kEdgeSilence, SegmentLabel::kDisfluency});

  SynthRecording rec;
  const auto total = static_cast<std::size_t>(std::llround(duration_s * rate));
  rec.audio.sample_rate = rate;
  rec.audio.samples.assign(total, 0.0);
  rec.truth.sample_rate = rate;
  rec.truth.total_samples = total;
  double acc = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    acc += parts[i].first;
    const std::size_t end =
        i + 1 == parts.size() ? total : std::min(total, static_cast<std::size_t>(std::llround(acc * rate)));
    if (end <= start) continue;
    if (parts[i].second == SegmentLabel::kSpeech) {
      const auto burst = voiced_burst(end - start, rate, p, d);
      std::copy(burst.begin(), burst.end(), rec.audio.samples.begin() + static_cast<std::ptrdiff_t>(start));
    }
    if (!rec.truth.segments.empty() && rec.truth.segments.back().label == parts[i].second) {
      rec.truth.segments.back().end = end;
    } else {
      rec.truth.segments.push_back({start, end, parts[i].second});
    }
    start = end;
  }
  for (double& x : rec.audio.samples) x += p.noise_level * d.normal();
  return rec;
}

std::string SynthCorpusSpec::hash() const {
  std::ostringstream s;
  s << "n=" << n_per_class << ";dur=" << fmt_double(duration_s) << ";rate=" << sample_rate
    << ";seed=" << seed;
  for (const auto* p : {&cr, &mci}) {
    s << ";" << fmt_double(p->pause_rate_hz) << "," << fmt_double(p->pause_mean_s) << ","
      << fmt_double(p->pause_sd_s) << "," << fmt_double(p->f0_mean_hz) << ","
      << fmt_double(p->f0_jitter) << "," << fmt_double(p->noise_level);
  }
  return to_hex(fnv1a64(s.str()));
}

void SynthCorpusSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (n_per_class == 0) fail("n_per_class must be positive");
  if (!(duration_s >= 1.0)) fail("duration must be at least 1 s");
  if (sample_rate < 8000) fail("sample rate must be at least 8000");
  for (const auto* p : {&cr, &mci}) {
    if (!(p->pause_rate_hz > 0.0) || !(p->pause_mean_s > 0.0) || p->pause_sd_s < 0.0 ||
        !(p->f0_mean_hz > 50.0) || p->f0_jitter < 0.0 || p->noise_level < 0.0) {
      fail("invalid class generator parameters");
    }
  }
  if (cr.pause_rate_hz == mci.pause_rate_hz && cr.pause_mean_s == mci.pause_mean_s &&
      cr.pause_sd_s == mci.pause_sd_s && cr.f0_mean_hz == mci.f0_mean_hz &&
      cr.f0_jitter == mci.f0_jitter && cr.noise_level == mci.noise_level) {
    fail("class generators are identical");
  }
}

std::vector<std::string> synth_corpus(const SynthCorpusSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::kIo, "cannot create directory " + out_dir.string());
  }
  const std::string hash = spec.hash();
  std::vector<std::string> ids;
  std::string labels = "# config=" + hash + "\nfilename,label\n";
  for (int label : {0, 1}) {
    const auto& params = label == 0 ? spec.cr : spec.mci;
    for (std::size_t i = 0; i < spec.n_per_class; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s_%03zu", label == 0 ? "cr" : "mci", i);
      const std::uint64_t seed =
          splitmix64(spec.seed ^ splitmix64((static_cast<std::uint64_t>(label) << 32) | i));
      const auto rec = synth_recording(params, spec.duration_s, spec.sample_rate, seed);
      write_wav(out_dir / (std::string(id) + ".wav"), rec.audio, "config=" + hash);
      write_segments_csv(out_dir / (std::string(id) + ".segments.csv"), rec.truth, hash);
      labels += std::string(id) + ".wav," + to_string(static_cast<ClassLabel>(label)) + "\n";
      ids.emplace_back(id);
    }
  }
  std::ofstream f(out_dir / "labels.csv", std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + (out_dir / "labels.csv").string());
  f << labels;
  if (!f) throw Error(ErrorCode::kIo, "short write to labels.csv");
  return ids;
}

}  // namespace mcivoice
