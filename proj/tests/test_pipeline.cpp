#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mcivoice/error.hpp"
#include "mcivoice/pipeline.hpp"
#include "test_util.hpp"

using namespace mcivoice;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

SynthCorpusSpec small_corpus(std::size_t n) {
  SynthCorpusSpec spec;
  spec.n_per_class = n;
  spec.duration_s = 2.0;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_CASE("config precedence: overrides > file > defaults") {
  const auto dir = testutil::temp_dir("cfg");
  write_text(dir / "a.cfg", "# comment\ncv.k = 5\nknn.k = 3  # inline\n\nseed = 9\n");
  const auto cfg = load_config(dir / "a.cfg", {{"seed", "4"}});
  CHECK(cfg.cv_k == 5);
  CHECK(cfg.knn.k == 3);
  CHECK(cfg.seed == 4);
  CHECK(cfg.selection.k == 80);
  CHECK(cfg.get("selection.alpha") == PipelineConfig{}.get("selection.alpha"));

  CHECK_THROWS_AS(load_config({}, {{"no.such.key", "1"}}), Error);
  CHECK_THROWS_AS(load_config({}, {{"cv.k", "ten"}}), Error);
  CHECK_THROWS_AS(load_config({}, {{"cv.k", "1"}}), Error);
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), Error);
}

TEST_CASE("config hash tracks every key but threads") {
  PipelineConfig a;
  const auto h = a.hash();
  CHECK(h.size() == 16);
  PipelineConfig b;
  b.set("threads", "3");
  CHECK(b.hash() == h);
  for (const auto& key : PipelineConfig::keys()) {
    PipelineConfig c;
    c.set(key, c.get(key));
    CHECK(c.hash() == h);
  }
  b.set("mfcc.n_coeffs", "12");
  CHECK(b.hash() != h);
  b.set("mfcc.n_coeffs", PipelineConfig{}.get("mfcc.n_coeffs"));
  CHECK(b.hash() == h);
  PipelineConfig d;
  d.set("classifiers", "svm,knn");
  CHECK(d.classifiers.size() == 2);
  CHECK(d.hash() != h);
}

TEST_CASE("label files") {
  const auto dir = testutil::temp_dir("labels");
  write_text(dir / "l.csv", "# config=x\nfilename,label\na.wav,CR\n\nb.wav,MCI\n");
  const auto labels = read_label_file(dir / "l.csv");
  CHECK(labels.size() == 2);
  CHECK(labels.at("a.wav") == 0);
  CHECK(labels.at("b.wav") == 1);
  write_text(dir / "dup.csv", "a.wav,CR\na.wav,MCI\n");
  CHECK_THROWS_AS(read_label_file(dir / "dup.csv"), Error);
  write_text(dir / "bad.csv", "a.wav,AD\n");
  CHECK_THROWS_AS(read_label_file(dir / "bad.csv"), Error);
}

TEST_CASE("synth recordings are deterministic") {
  const SynthClassParams p;
  const auto a = synth_recording(p, 2.0, kCanonicalRate, 99);
  const auto b = synth_recording(p, 2.0, kCanonicalRate, 99);
  const auto c = synth_recording(p, 2.0, kCanonicalRate, 100);
  CHECK(a.audio.samples == b.audio.samples);
  CHECK(a.truth == b.truth);
  CHECK(a.audio.samples != c.audio.samples);
  CHECK(a.audio.samples.size() == static_cast<std::size_t>(2.0 * kCanonicalRate));
  validate(a.truth);
}

TEST_CASE("synth corpus files are byte-identical per seed") {
  const auto spec = small_corpus(2);
  const auto d1 = testutil::temp_dir("synth1");
  const auto d2 = testutil::temp_dir("synth2");
  const auto ids = synth_corpus(spec, d1);
  CHECK(synth_corpus(spec, d2) == ids);
  CHECK(ids.size() == 4);
  for (const auto& id : ids) {
    CHECK(slurp(d1 / (id + ".wav")) == slurp(d2 / (id + ".wav")));
    CHECK(slurp(d1 / (id + ".segments.csv")) == slurp(d2 / (id + ".segments.csv")));
  }
  CHECK(slurp(d1 / "labels.csv") == slurp(d2 / "labels.csv"));
  CHECK(slurp(d1 / "labels.csv").find("config=" + spec.hash()) != std::string::npos);

  auto other = spec;
  other.mci = other.cr;
  CHECK_THROWS_AS(other.validate(), Error);
}

TEST_CASE("synth ground truth matches the VAD within two frames") {
  const VadConfig vcfg;
  const auto hop = static_cast<double>(kCanonicalRate) * vcfg.hop_ms / 1000.0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto params = seed % 2 ? SynthClassParams{} : SynthCorpusSpec{}.mci;
    const auto rec = synth_recording(params, 3.0, kCanonicalRate, seed);
    const auto got = vad(rec.audio, vcfg);
    INFO("seed " << seed);
    REQUIRE(got.segments.size() == rec.truth.segments.size());
    for (std::size_t i = 0; i < got.segments.size(); ++i) {
      CHECK(got.segments[i].label == rec.truth.segments[i].label);
      const double ds = std::abs(static_cast<double>(got.segments[i].start) -
                                 static_cast<double>(rec.truth.segments[i].start));
      CHECK(ds <= 2.0 * hop);
    }
  }
}

TEST_CASE("extract, rerun and bad files") {
  const auto dir = testutil::temp_dir("extract");
  synth_corpus(small_corpus(2), dir);
  PipelineConfig cfg;
  cfg.threads = 2;
  const auto r1 = extract_directory(dir, dir / "labels.csv", cfg, false);
  CHECK(r1.problems.empty());
  CHECK(r1.dataset.n_rows() == 4);
  CHECK(r1.dataset.feature_names == feature_inventory(cfg.features));
  CHECK(r1.dataset.config_hash == cfg.hash());
  cfg.threads = 1;
  const auto r2 = extract_directory(dir, dir / "labels.csv", cfg, false);
  CHECK(dataset_to_csv(r1.dataset) == dataset_to_csv(r2.dataset));

  // An unlabelled recording aborts the run unless bad files are skipped.
  fs::copy_file(dir / "cr_000.wav", dir / "stray.wav");
  CHECK_THROWS_AS(extract_directory(dir, dir / "labels.csv", cfg, false), Error);
  const auto r3 = extract_directory(dir, dir / "labels.csv", cfg, true);
  CHECK(r3.dataset.n_rows() == 4);
  CHECK(r3.problems.size() == 1);

  write_text(dir / "broken.wav", "not a wav");
  write_text(dir / "labels2.csv", slurp(dir / "labels.csv") + "broken.wav,CR\nstray.wav,MCI\n");
  CHECK_THROWS_AS(extract_directory(dir, dir / "labels2.csv", cfg, false), Error);
  const auto r4 = extract_directory(dir, dir / "labels2.csv", cfg, true);
  CHECK(r4.dataset.n_rows() == 5);
  CHECK(r4.problems.size() == 1);
}

TEST_CASE("funnel is monotone") {
  const auto dir = testutil::temp_dir("funnel");
  synth_corpus(small_corpus(6), dir);
  PipelineConfig cfg;
  const auto ds = extract_directory(dir, dir / "labels.csv", cfg, false).dataset;
  const auto f = compute_funnel(ds, cfg.selection);
  CHECK(f.d_initial == ds.n_features());
  CHECK(f.d_initial >= f.d_utest);
  CHECK(f.d_utest >= f.d_final);
  CHECK(f.d_final <= cfg.selection.k);
  CHECK(funnel_line(f).find(std::to_string(f.d_initial)) == 0);

  cfg.set("cv.k", "3");
  cfg.set("classifiers", "knn,svm");
  const auto run = run_pipeline(ds, cfg);
  CHECK(run.reports.size() == 2);
  CHECK(run_result_json(run, cfg) == run_result_json(run_pipeline(ds, cfg), cfg));
}

TEST_CASE("a silent file is one disfluency segment") {
  const auto dir = testutil::temp_dir("silence");
  AudioSignal sig;
  sig.samples.assign(kCanonicalRate, 0.0);
  write_wav(dir / "quiet.wav", sig);
  const auto segs = segment_file(dir / "quiet.wav", PipelineConfig{});
  REQUIRE(segs.segments.size() == 1);
  CHECK(segs.segments[0].label == SegmentLabel::kDisfluency);
  CHECK(segs.segments[0].length() == sig.samples.size());
}
