// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/evaluation.hpp"
#include "mcivoice/features_classical.hpp"
#include "mcivoice/features_nonlinear.hpp"
#include "mcivoice/features_perceptual.hpp"
#include "mcivoice/pipeline.hpp"
#include "mcivoice/selection.hpp"
#include "test_util.hpp"

using namespace mcivoice;
using Clock = std::chrono::steady_clock;

namespace tol {
constexpr double kExactP = 1e-12;          // exact U path vs enumeration
constexpr double kNormalP = 0.01;          // normal approximation at 8/8
constexpr double kUTestSeconds = 10.0;
constexpr double kHiguchiLine = 0.05;
constexpr double kHiguchiNoise = 0.1;
constexpr double kPeNoise = 0.998;
constexpr double kPitchHz = 2.0;
constexpr double kFormantHz = 60.0;
constexpr double kGain = 1e-6;
constexpr double kPerturbation = 1e-6;
constexpr double kGradRelErr = 1e-4;
constexpr double kKkt = 1e-3;
constexpr double kNoiseKeptLo = 70, kNoiseKeptHi = 130;
constexpr double kEndToEndCer = 10.0;
constexpr double kEndToEndSeconds = 600.0;
}  // namespace tol

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::ostringstream note;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note << " [failed: " << what << "]";
    }
  }
};

double brute_force_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const std::size_t n = all.size(), na = a.size();
  auto u_of = [&](const std::vector<bool>& in_a) {
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_a[j]) continue;
        if (all[i] > all[j]) u += 1.0;
        else if (all[i] == all[j]) u += 0.5;
      }
    }
    return u;
  };
  std::vector<bool> observed(n, false);
  std::fill(observed.begin(), observed.begin() + static_cast<long>(na), true);
  const double u_obs = u_of(observed);
  const double u_min = std::min(u_obs, static_cast<double>(na * (n - na)) - u_obs);
  std::vector<bool> mask = observed;
  double total = 0.0, extreme = 0.0;
  do {
    total += 1.0;
    if (u_of(mask) <= u_min + 1e-9) extreme += 1.0;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return std::min(1.0, 2.0 * extreme / total);
}

void statistical_oracle(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(500);
  double worst_exact = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t na = 1 + rng() % 8, nb = 1 + rng() % 8;
    const auto a = testutil::uniform(na, rng());
    const auto b = testutil::uniform(nb, rng());
    const double p = mann_whitney_u(a, b, UTestMethod::kExact).p_two_sided;
    worst_exact = std::max(worst_exact, std::abs(p - brute_force_p(a, b)));
  }
  // 8/8 instances swept over group shifts so every U in [0, 32] is visited.
  double worst_normal = 0.0, worst_u = -1.0;
  std::vector<bool> seen_u(33, false);
  for (int trial = 0; trial < 400; ++trial) {
    const auto a = testutil::uniform(8, rng());
    auto b = testutil::uniform(8, rng());
    const double shift = 0.05 * (trial % 24);
    for (auto& v : b) v += shift;
    const auto r = mann_whitney_u(a, b, UTestMethod::kNormal);
    seen_u[static_cast<std::size_t>(r.u)] = true;
    const double d = std::abs(r.p_two_sided - brute_force_p(a, b));
    if (d > worst_normal) {
      worst_normal = d;
      worst_u = r.u;
    }
  }
  const auto n_seen = std::count(seen_u.begin(), seen_u.end(), true);
  const double secs = seconds_since(t0);
  c.note << "max |dp| exact " << worst_exact << ", normal@8/8 " << worst_normal << " (U=" << worst_u << ", "
         << n_seen << "/33 U values), " << secs << " s";
  c.expect(worst_exact <= tol::kExactP, "exact path");
  c.expect(n_seen == 33, "U coverage");
  c.expect(worst_normal <= tol::kNormalP, "normal approximation");
  c.expect(secs < tol::kUTestSeconds, "runtime");
}

void nonlinear_estimators(Check& c) {
  std::vector<double> line(1000), ramp(500);
  for (std::size_t i = 0; i < line.size(); ++i) line[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  const double fd_line = higuchi_fd(line);
  const double fd_noise = higuchi_fd(testutil::gaussian(10000, 5));
  const double pe_ramp = permutation_entropy(ramp, 3);
  const double pe_noise = permutation_entropy(testutil::uniform(10000, 9), 3);
  std::vector<double> eight;
  for (int rep = 0; rep < 10; ++rep)
    for (int v = 0; v < 8; ++v) eight.push_back(v);
  const double h8 = shannon_entropy(eight, 8);
  c.note << "HFD line " << fd_line << ", HFD noise " << fd_noise << ", PE ramp " << pe_ramp
         << ", PE noise " << pe_noise << ", H(8 bins) " << h8;
  c.expect(std::abs(fd_line - 1.0) <= tol::kHiguchiLine, "Higuchi line");
  c.expect(std::abs(fd_noise - 2.0) <= tol::kHiguchiNoise, "Higuchi noise");
  c.expect(pe_ramp == 0.0, "PE ramp");
  c.expect(pe_noise >= tol::kPeNoise, "PE noise");
  c.expect(h8 == 3.0, "Shannon 8 bins");
}

void dsp_checks(Check& c) {
  // Pitch of a 220 Hz tone (the final partial frame is excluded).
  const auto tone = frame(testutil::sine(220.0, 1.0, 0.8), 25.0, 10.0);
  const auto pt = pitch_track(tone);
  double pitch_err = 0.0;
  for (std::size_t i = 0; i + 1 < pt.size(); ++i) pitch_err = std::max(pitch_err, std::abs(pt.f0[i] - 220.0));

  const auto k1 = testutil::sine(1000.0, 0.025);
  const double centroid = frame_descriptors(k1.samples, kCanonicalRate).spectral_centroid;
  const double bin = static_cast<double>(kCanonicalRate) / 1024.0;

  const auto vowel = testutil::resonant_vowel(120.0, 0.5, {700, 1220, 2600}, {60, 70, 90});
  const auto vf = frame(vowel, 25.0, 10.0);
  const auto vp = pitch_track(vf);
  const auto ft = formant_track(vf, &vp);
  double f[3] = {0, 0, 0};
  for (std::size_t i = 0; i < ft.size(); ++i) {
    f[0] += ft.f1[i];
    f[1] += ft.f2[i];
    f[2] += ft.f3[i];
  }
  const double targets[3] = {700, 1220, 2600};
  double formant_err = ft.size() == 0 ? INFINITY : 0.0;
  for (int k = 0; k < 3 && ft.size() > 0; ++k) {
    formant_err = std::max(formant_err, std::abs(f[k] / static_cast<double>(ft.size()) - targets[k]));
  }

  auto gained = [](double g) {
    auto s = testutil::resonant_vowel(130.0, 0.5, {650, 1150, 2500}, {80, 90, 120}, 0.4);
    const auto noise = testutil::gaussian(s.size(), 12, 0.002);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] = g * (s.samples[i] + noise[i]);
    return mfcc(frame(s, 25.0, 10.0));
  };
  const auto m1 = gained(1.0), m2 = gained(2.0);
  double gain_err = 0.0;
  for (std::size_t r = 0; r < m1.frames(); ++r)
    for (std::size_t k = 1; k <= 12; ++k) gain_err = std::max(gain_err, std::abs(m1.values(r, k) - m2.values(r, k)));

  AudioSignal saw;
  saw.samples.resize(kCanonicalRate);
  for (std::size_t i = 0; i < saw.samples.size(); ++i) saw.samples[i] = 0.8 * (2.0 * static_cast<double>(i % 147) / 147.0 - 1.0);
  const auto pp = perturbation(saw, pitch_track(frame(saw, 25.0, 10.0)));

  c.note << "pitch err " << pitch_err << " Hz, centroid " << centroid << " Hz (bin " << bin << "), formant err "
         << formant_err << " Hz, MFCC gain err " << gain_err << ", jitter " << pp.jitter_local << ", shimmer "
         << pp.shimmer_local;
  c.expect(pt.size() > 1 && pitch_err <= tol::kPitchHz, "pitch");
  c.expect(std::abs(centroid - 1000.0) <= bin, "centroid");
  c.expect(formant_err <= tol::kFormantHz, "formants");
  c.expect(gain_err <= tol::kGain, "MFCC gain invariance");
  c.expect(pp.jitter_local < tol::kPerturbation && pp.shimmer_local < tol::kPerturbation, "jitter/shimmer");
}

Dataset tiny(std::size_t dim, std::size_t n, std::uint64_t seed) {
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < dim; ++j) cols.push_back(testutil::uniform(n, seed + j));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  return testutil::make_dataset(cols, labels);
}

void learning_checks(Check& c) {
  auto mlp = ClassifierSpec::of(ClassifierKind::kMlp);
  mlp.mlp.hidden = {2};
  const double g_mlp = gradient_check(mlp, tiny(4, 5, 1));
  auto cnn = ClassifierSpec::of(ClassifierKind::kCnn);
  cnn.cnn.n_filters = 1;
  cnn.cnn.dense = {};
  const double g_cnn = gradient_check(cnn, tiny(25, 5, 3));

  const auto sq = testutil::make_dataset({{0, 0, 1, 1}, {0, 1, 0, 1}}, {0, 0, 1, 1});
  const auto svm = train(ClassifierSpec::of(ClassifierKind::kSvm), sq);
  const double train_cer = cer(predict_all(svm, sq.x), sq.labels);
  const std::vector<int> y = {-1, -1, 1, 1};
  const SvmParams sp;
  const double kkt = kkt_residual(smo_train(sq.x, y, sp), sq.x, y, sp.c);

  const auto chain = cnn_shape_chain(CnnParams{}, 81);
  const std::vector<std::vector<std::size_t>> want = {{7, 7, 20}, {3, 3, 20}, {180}, {CnnParams{}.dense.at(0)}, {2}};
  std::string shape;
  for (const auto& s : chain) {
    if (!shape.empty()) shape += " -> ";
    for (std::size_t i = 0; i < s.size(); ++i) shape += (i ? "x" : "") + std::to_string(s[i]);
  }
  c.note << "grad rel err MLP " << g_mlp << ", CNN " << g_cnn << "; SVM train CER " << train_cer << "%, KKT " << kkt
         << "; CNN " << shape;
  c.expect(g_mlp < tol::kGradRelErr && g_cnn < tol::kGradRelErr, "gradient check");
  c.expect(train_cer == 0.0, "SVM training CER");
  c.expect(kkt <= tol::kKkt, "KKT residual");
  c.expect(chain == want, "CNN shape chain");
}

void funnel_fidelity(Check& c, const Dataset* corpus) {
  const SelectionParams defaults;
  std::vector<std::vector<double>> cols;
  for (std::uint64_t j = 0; j < 1000; ++j) cols.push_back(testutil::gaussian(60, 1000 + j));
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < 60; ++i) labels[i] = i < 30 ? 0 : 1;
  const auto noise = testutil::make_dataset(cols, labels);
  const auto fn = compute_funnel(noise, defaults);
  const auto kept = static_cast<double>(fn.d_utest);
  c.note << "noise " << funnel_line(fn);
  c.expect(defaults.alpha == 0.1 && defaults.k == 80, "defaults");
  c.expect(kept >= tol::kNoiseKeptLo && kept <= tol::kNoiseKeptHi, "noise U-test count");
  c.expect(fn.d_initial >= fn.d_utest && fn.d_utest >= fn.d_final, "noise monotone");
  if (corpus) {
    const auto fc = compute_funnel(*corpus, defaults);
    c.note << "; corpus " << funnel_line(fc);
    c.expect(fc.d_initial >= fc.d_utest && fc.d_utest >= fc.d_final && fc.d_final <= defaults.k, "corpus monotone");
  }
}

struct EndToEnd {
  Dataset dataset;
  std::string report;
  RunResult result;
  double seconds = 0.0;
};

EndToEnd end_to_end_once(const std::filesystem::path& dir) {
  const auto t0 = Clock::now();
  SynthCorpusSpec spec;  // 30 + 30 recordings of 3 s
  spec.seed = 7;
  synth_corpus(spec, dir);
  PipelineConfig cfg;  // 10-fold CV, all four classifiers
  EndToEnd e;
  e.dataset = extract_directory(dir, dir / "labels.csv", cfg, false).dataset;
  e.result = run_pipeline(e.dataset, cfg);
  e.report = run_result_json(e.result, cfg);
  e.seconds = seconds_since(t0);
  return e;
}

void end_to_end(Check& c, const EndToEnd& a, const EndToEnd& b) {
  c.note << a.dataset.n_rows() << " recordings, " << funnel_line(a.result.funnel) << ";";
  for (const auto& r : a.result.reports) {
    c.note << " " << to_string(r.spec.kind) << " " << r.cer << "%";
    c.expect(r.cer <= tol::kEndToEndCer, std::string(to_string(r.spec.kind)) + " CER");
  }
  c.note << "; " << a.seconds << " s";
  c.expect(a.result.reports.size() == 4, "four classifiers");
  c.expect(a.seconds < tol::kEndToEndSeconds, "runtime");
  c.expect(a.report == b.report, "bit-identical rerun");
}

void cross_validation(Check& c) {
  std::vector<int> y(100, 0);
  std::fill(y.begin() + 60, y.end(), 1);
  const auto folds = stratified_kfold(y, 10, 5);
  bool partition = folds.size() == y.size();
  std::size_t worst_spread = 0;
  for (int label : {0, 1}) {
    std::vector<std::size_t> counts(10, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      partition = partition && folds[i] < 10;
      if (y[i] == label) counts[folds[i]]++;
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    worst_spread = std::max(worst_spread, *hi - *lo);
  }
  auto ds = testutil::make_dataset({testutil::gaussian(100, 3)}, y);
  CvConfig cfg;
  cfg.selection.enabled = false;
  const auto r = cross_validate(ds, ClassifierSpec::of(ClassifierKind::kMajority), cfg);
  std::size_t tested = 0;
  for (const auto& f : r.folds) tested += f.n_test;
  c.note << "per-class fold spread " << worst_spread << ", majority CER " << r.cer;
  c.expect(partition && tested == y.size(), "partition");
  c.expect(worst_spread <= 1, "stratification");
  c.expect(r.cer == 40.0, "majority baseline");
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<void(Check&)>& fn) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.note << " [exception: " << e.what() << "]";
    }
    std::printf("%s  %-24s %s\n", c.ok ? "PASS" : "FAIL", name, c.note.str().c_str());
    std::fflush(stdout);
    failures += c.ok ? 0 : 1;
  };

  const auto root = testutil::temp_dir("acceptance");
  EndToEnd first, second;
  std::string e2e_error;
  try {
    first = end_to_end_once(root / "run1");
    second = end_to_end_once(root / "run2");
  } catch (const std::exception& e) {
    e2e_error = e.what();
  }
  const bool have_corpus = e2e_error.empty();

  report("statistical-oracle", statistical_oracle);
  report("nonlinear-estimators", nonlinear_estimators);
  report("dsp-checks", dsp_checks);
  report("learning-checks", learning_checks);
  report("funnel-fidelity", [&](Check& c) { funnel_fidelity(c, have_corpus ? &first.dataset : nullptr); });
  report("end-to-end", [&](Check& c) {
    if (!have_corpus) throw std::runtime_error(e2e_error);
    end_to_end(c, first, second);
  });
  report("cross-validation", cross_validation);
  return failures == 0 ? 0 : 1;
}
