#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

#include "mcivoice/dataset.hpp"
#include "mcivoice/error.hpp"
#include "mcivoice/evaluation.hpp"
#include "mcivoice/features_nonlinear.hpp"
#include "mcivoice/pipeline.hpp"
#include "mcivoice/selection.hpp"

namespace py = pybind11;
namespace mv = mcivoice;

namespace {

using Overrides = std::map<std::string, std::string>;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

mv::PipelineConfig config_from(const Overrides& overrides) { return mv::load_config({}, overrides); }

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

mv::Dataset to_dataset(const Array& x, const std::vector<int>& labels) {
  if (x.ndim() != 2) throw py::value_error("expected a 2-D feature matrix");
  const auto n = static_cast<std::size_t>(x.shape(0)), d = static_cast<std::size_t>(x.shape(1));
  if (labels.size() != n) throw py::value_error("labels must have one entry per row");
  mv::Dataset ds;
  ds.x = mv::Matrix(n, d);
  std::copy(x.data(), x.data() + x.size(), ds.x.data.begin());
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) ds.ids.push_back("r" + std::to_string(i));
  ds.labels = labels;
  mv::validate(ds);
  return ds;
}

py::dict dataset_dict(const mv::Dataset& ds) {
  Array x({ds.n_rows(), ds.n_features()});
  std::copy(ds.x.data.begin(), ds.x.data.end(), x.mutable_data());
  py::dict d;
  d["ids"] = ds.ids;
  d["feature_names"] = ds.feature_names;
  d["x"] = x;
  d["labels"] = ds.labels;
  d["config_hash"] = ds.config_hash;
  return d;
}

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

mv::UTestMethod parse_method(const std::string& m) {
  if (m == "auto") return mv::UTestMethod::kAuto;
  if (m == "exact") return mv::UTestMethod::kExact;
  if (m == "normal") return mv::UTestMethod::kNormal;
  throw py::value_error("method must be auto, exact or normal");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of mcivoice";

  py::register_exception<mv::Error>(m, "Error", PyExc_RuntimeError);

  m.def("config_keys", &mv::PipelineConfig::keys);
  m.def(
      "config_text", [](const Overrides& o) { return config_from(o).to_text(); }, py::arg("overrides") = Overrides{});
  m.def(
      "config_hash", [](const Overrides& o) { return config_from(o).hash(); }, py::arg("overrides") = Overrides{});

  m.def(
      "mann_whitney_u",
      [](const Array& a, const Array& b, const std::string& method) {
        const auto r = mv::mann_whitney_u(to_vector(a), to_vector(b), parse_method(method));
        py::dict d;
        d["u"] = r.u;
        d["u_a"] = r.u_a;
        d["u_b"] = r.u_b;
        d["p"] = r.p_two_sided;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("method") = "auto");

  m.def(
      "shannon_entropy", [](const Array& x, std::size_t bins) { return mv::shannon_entropy(to_vector(x), bins); },
      py::arg("x"), py::arg("bins") = 64);
  m.def(
      "higuchi_fd", [](const Array& x, std::size_t k_max) { return mv::higuchi_fd(to_vector(x), k_max); },
      py::arg("x"), py::arg("k_max") = 10);
  m.def(
      "permutation_entropy",
      [](const Array& x, std::size_t order, std::size_t delay) {
        return mv::permutation_entropy(to_vector(x), order, delay);
      },
      py::arg("x"), py::arg("order") = 3, py::arg("delay") = 1);

  m.def(
      "segment",
      [](const Array& samples, int rate, const Overrides& o) {
        mv::AudioSignal sig{to_vector(samples), rate};
        auto cfg = config_from(o);
        const auto segs = mv::vad(sig.sample_rate == cfg.sample_rate ? sig : mv::resample(sig, cfg.sample_rate),
                                  cfg.vad);
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
        for (const auto& s : segs.segments) out.emplace_back(s.start, s.end, mv::to_string(s.label));
        return out;
      },
      py::arg("samples"), py::arg("rate"), py::arg("overrides") = Overrides{},
      "Speech/disfluency segments as (start, end, label) sample ranges at the analysis rate.");

  m.def(
      "analyse_file",
      [](const std::filesystem::path& wav, const Overrides& o) {
        const auto a = mv::analyse_recording(wav, config_from(o));
        return std::make_pair(a.features.names, a.features.values);
      },
      py::arg("wav"), py::arg("overrides") = Overrides{});

  m.def(
      "synth_corpus",
      [](const std::filesystem::path& out, std::size_t n_per_class, double duration, std::uint64_t seed) {
        mv::SynthCorpusSpec spec;
        spec.n_per_class = n_per_class;
        spec.duration_s = duration;
        spec.seed = seed;
        return mv::synth_corpus(spec, out);
      },
      py::arg("out_dir"), py::arg("n_per_class") = 30, py::arg("duration") = 3.0, py::arg("seed") = 1);

  m.def(
      "extract",
      [](const std::filesystem::path& dir, const std::filesystem::path& labels, const Overrides& o, bool skip_bad) {
        mv::ExtractResult r;
        {
          py::gil_scoped_release release;
          r = mv::extract_directory(dir, labels, config_from(o), skip_bad);
        }
        auto d = dataset_dict(r.dataset);
        d["problems"] = r.problems;
        return d;
      },
      py::arg("wav_dir"), py::arg("labels"), py::arg("overrides") = Overrides{}, py::arg("skip_bad") = false);

  m.def(
      "read_dataset", [](const std::filesystem::path& p) { return dataset_dict(mv::read_dataset(p)); },
      py::arg("path"));

  m.def(
      "stratified_kfold",
      [](const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
        return mv::stratified_kfold(labels, k, seed);
      },
      py::arg("labels"), py::arg("k") = 10, py::arg("seed") = 1);

  m.def(
      "cross_validate",
      [](const Array& x, const std::vector<int>& labels, const std::string& classifier, const Overrides& o) {
        const auto ds = to_dataset(x, labels);
        const auto cfg = config_from(o);
        const auto spec = cfg.spec_for(mv::parse_classifier_kind(classifier));
        std::string json;
        {
          py::gil_scoped_release release;
          json = mv::report_to_json(mv::cross_validate(ds, spec, cfg.cv_config()), cfg.hash());
        }
        return parse_json(json);
      },
      py::arg("x"), py::arg("labels"), py::arg("classifier") = "svm", py::arg("overrides") = Overrides{},
      "Cross-validated report for one classifier; settings use the CLI config keys.");

  m.def(
      "run",
      [](const Array& x, const std::vector<int>& labels, const Overrides& o) {
        const auto ds = to_dataset(x, labels);
        const auto cfg = config_from(o);
        std::string json;
        {
          py::gil_scoped_release release;
          json = mv::run_result_json(mv::run_pipeline(ds, cfg), cfg);
        }
        return parse_json(json);
      },
      py::arg("x"), py::arg("labels"), py::arg("overrides") = Overrides{});
}
