#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/error.hpp"
#include "test_util.hpp"

using namespace mcivoice;

namespace {

Dataset square_set() {
  return testutil::make_dataset({{0, 0, 1, 1}, {0, 1, 0, 1}}, {0, 0, 1, 1});
}

Dataset tiny_set(std::size_t dim, std::size_t n, std::uint64_t seed) {
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < dim; ++j) cols.push_back(testutil::uniform(n, seed + j));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  return testutil::make_dataset(cols, labels);
}

double error_rate(const TrainedModel& m, const Dataset& ds) {
  const auto p = predict_all(m, ds.x);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < p.size(); ++i) wrong += p[i] != ds.labels[i];
  return static_cast<double>(wrong) / static_cast<double>(p.size());
}

}  // namespace

TEST_CASE("classifier kind names") {
  for (auto k : {ClassifierKind::kKnn, ClassifierKind::kSvm, ClassifierKind::kMlp, ClassifierKind::kCnn,
                 ClassifierKind::kMajority}) {
    CHECK(parse_classifier_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_classifier_kind("forest"), Error);
}

TEST_CASE("SVM on a separable square") {
  const auto ds = square_set();
  const auto model = train(ClassifierSpec::of(ClassifierKind::kSvm), ds);
  CHECK(error_rate(model, ds) == 0.0);

  std::vector<int> y = {-1, -1, 1, 1};
  const SvmParams params;
  const auto r = smo_train(ds.x, y, params);
  CHECK(kkt_residual(r, ds.x, y, params.c) <= 1e-3);
  double balance = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.alphas[i] >= 0.0);
    CHECK(r.alphas[i] <= params.c);
    balance += r.alphas[i] * y[i];
  }
  CHECK(std::abs(balance) < 1e-8);
}

TEST_CASE("SVM KKT on a noisy overlapping set") {
  const auto ds = tiny_set(5, 60, 70);
  std::vector<int> y(ds.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ds.labels[i] ? 1 : -1;
  SvmParams params;
  const auto r = smo_train(ds.x, y, params);
  CHECK(kkt_residual(r, ds.x, y, params.c) <= params.tolerance);
  double balance = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) balance += r.alphas[i] * y[i];
  CHECK(std::abs(balance) < 1e-8);
}

TEST_CASE("SVM sign rule") {
  TrainedModel m;
  m.spec = ClassifierSpec::of(ClassifierKind::kSvm);
  m.input_dim = 2;
  m.params = SvmModel{{1.0, 0.0}, -0.5, 0};
  CHECK(predict(m, std::vector<double>{0.9, 0.2}) == 1);
  CHECK(predict(m, std::vector<double>{0.1, 0.9}) == 0);
  CHECK_THROWS_AS(predict(m, std::vector<double>{0.1}), Error);
}

TEST_CASE("KNN") {
  const auto ds = testutil::make_dataset({{0.0, 0.1, 0.2, 1.0, 5.0}}, {0, 0, 1, 1, 1});
  auto spec = ClassifierSpec::of(ClassifierKind::kKnn);
  auto m = train(spec, ds);
  CHECK(std::get<KnnModel>(m.params).x.rows == 5);
  CHECK(predict(m, std::vector<double>{0.2}) == 1);
  CHECK(error_rate(m, ds) == 0.0);
  spec.knn.k = 3;
  m = train(spec, ds);
  // Neighbours of 0.05: 0.0 (CR), 0.1 (CR), 0.2 (MCI).
  CHECK(predict(m, std::vector<double>{0.05}) == 0);
  spec.knn.k = 2;
  m = train(spec, ds);
  // Tie between 0.2 (MCI, nearest) and 0.1 (CR): nearest wins.
  CHECK(predict(m, std::vector<double>{0.19}) == 1);
  // Equal distances: lower training index first.
  spec.knn.k = 1;
  const auto eq = testutil::make_dataset({{0.0, 2.0}}, {1, 0});
  CHECK(predict(train(spec, eq), std::vector<double>{1.0}) == 1);
}

TEST_CASE("majority baseline") {
  const auto ds = testutil::make_dataset({{1, 2, 3, 4, 5}}, {1, 1, 0, 1, 0});
  const auto m = train(ClassifierSpec::of(ClassifierKind::kMajority), ds);
  CHECK(predict(m, std::vector<double>{0.0}) == 1);
}

TEST_CASE("reshape_to_grid") {
  std::vector<double> x(80);
  std::iota(x.begin(), x.end(), 1.0);
  const auto g = reshape_to_grid(x);
  CHECK(g.rows == 9);
  CHECK(g.cols == 9);
  CHECK(g(8, 8) == 0.0);
  for (std::size_t i = 0; i < 80; ++i) CHECK(g.data[i] == x[i]);
  x.push_back(81.0);
  CHECK(reshape_to_grid(x)(8, 8) == 81.0);
}

TEST_CASE("CNN shapes and forward") {
  const CnnParams p;
  const auto chain = cnn_shape_chain(p, 80);
  REQUIRE(chain.size() == 5);
  CHECK(chain[0] == std::vector<std::size_t>{7, 7, 20});
  CHECK(chain[1] == std::vector<std::size_t>{3, 3, 20});
  CHECK(chain[2] == std::vector<std::size_t>{180});
  CHECK(chain[3] == std::vector<std::size_t>{20});
  CHECK(chain[4] == std::vector<std::size_t>{2});
  CHECK_THROWS_AS(cnn_shape_chain(p, 3), Error);

  auto m = init_network(ClassifierSpec::of(ClassifierKind::kCnn), 80);
  std::vector<double> zeros(parameter_count(m), 0.0);
  set_parameters(m, zeros);
  const auto scores = cnn_forward(std::get<CnnModel>(m.params), reshape_to_grid(std::vector<double>(80, 0.7)));
  CHECK(scores[0] == doctest::Approx(0.5));
  CHECK(scores[1] == doctest::Approx(0.5));
}

TEST_CASE("gradient checks") {
  SUBCASE("MLP 4-2-2") {
    auto spec = ClassifierSpec::of(ClassifierKind::kMlp);
    spec.mlp.hidden = {2};
    spec.mlp.seed = 7;
    CHECK(gradient_check(spec, tiny_set(4, 5, 1)) < 1e-4);
  }
  SUBCASE("MLP two hidden layers") {
    auto spec = ClassifierSpec::of(ClassifierKind::kMlp);
    spec.mlp.hidden = {5, 4};
    CHECK(gradient_check(spec, tiny_set(6, 7, 2)) < 1e-4);
  }
  SUBCASE("CNN one 3x3 filter on 5x5 input") {
    auto spec = ClassifierSpec::of(ClassifierKind::kCnn);
    spec.cnn.n_filters = 1;
    spec.cnn.dense = {};
    CHECK(gradient_check(spec, tiny_set(25, 5, 3)) < 1e-4);
  }
  SUBCASE("CNN with a dense layer") {
    auto spec = ClassifierSpec::of(ClassifierKind::kCnn);
    spec.cnn.n_filters = 2;
    spec.cnn.dense = {3};
    CHECK(gradient_check(spec, tiny_set(36, 6, 4)) < 1e-4);
  }
  SUBCASE("too many parameters") {
    CHECK_THROWS_AS(gradient_check(ClassifierSpec::of(ClassifierKind::kMlp), tiny_set(4, 5, 1)), Error);
  }
}

TEST_CASE("vanishing gradient at the separable optimum") {
  auto spec = ClassifierSpec::of(ClassifierKind::kMlp);
  spec.mlp.hidden = {};
  const auto ds = testutil::make_dataset({{0.0, 0.2, 0.8, 1.0}}, {0, 0, 1, 1});
  auto m = init_network(spec, 1);
  auto& out = std::get<MlpModel>(m.params).layers.at(0);
  // Logit difference 80 * (x - 0.5): the separating direction at large norm.
  out.w = {-40.0, 40.0};
  out.b = {20.0, -20.0};
  const auto lg = loss_and_gradient(m, ds.x, ds.labels);
  double norm = 0.0;
  for (double g : lg.gradient) norm += g * g;
  CHECK(std::sqrt(norm) < 1e-6);
  CHECK(lg.loss < 1e-6);
}

TEST_CASE("training is deterministic and the loss never increases") {
  const auto ds = tiny_set(16, 20, 11);
  for (auto kind : {ClassifierKind::kMlp, ClassifierKind::kCnn}) {
    auto spec = ClassifierSpec::of(kind);
    spec.mlp.hidden = {8};
    spec.mlp.epochs = 60;
    spec.cnn.n_filters = 3;
    spec.cnn.dense = {4};
    spec.cnn.epochs = 60;
    const auto a = train(spec, ds);
    const auto b = train(spec, ds);
    CHECK(get_parameters(a) == get_parameters(b));
    for (std::size_t i = 1; i < a.loss_history.size(); ++i) CHECK(a.loss_history[i] <= a.loss_history[i - 1]);
  }
}

TEST_CASE("networks fit a separable problem") {
  std::vector<double> f1 = testutil::uniform(40, 5), f2 = testutil::uniform(40, 6);
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = f1[i] + 0.3 * f2[i] > 0.65 ? 1 : 0;
  const auto ds = testutil::make_dataset({f1, f2}, labels);
  CHECK(error_rate(train(ClassifierSpec::of(ClassifierKind::kMlp), ds), ds) <= 0.1);
  auto cnn = ClassifierSpec::of(ClassifierKind::kCnn);
  // Two features fill a 2x2 grid; shrink the kernel and pool to fit.
  cnn.cnn.conv_size = 1;
  cnn.cnn.pool_size = 1;
  CHECK(error_rate(train(cnn, ds), ds) <= 0.1);
}

TEST_CASE("model files round-trip exactly") {
  const auto ds = tiny_set(16, 12, 21);
  const auto dir = testutil::temp_dir("models");
  for (auto kind : {ClassifierKind::kKnn, ClassifierKind::kSvm, ClassifierKind::kMlp, ClassifierKind::kCnn,
                    ClassifierKind::kMajority}) {
    auto spec = ClassifierSpec::of(kind);
    spec.mlp.epochs = 5;
    spec.cnn.epochs = 5;
    const auto m = train(spec, ds);
    const auto path = dir / (std::string(to_string(kind)) + ".json");
    save_model(path, m);
    const auto back = load_model(path);
    CHECK(back.input_dim == m.input_dim);
    CHECK(back.spec.kind == kind);
    CHECK(predict_all(back, ds.x) == predict_all(m, ds.x));
    if (kind == ClassifierKind::kMlp || kind == ClassifierKind::kCnn) {
      CHECK(get_parameters(back) == get_parameters(m));
    }
    CHECK(model_to_json(back) == model_to_json(m));
  }
  CHECK_THROWS_AS(model_from_json("{\"format\": \"nope\"}"), Error);
}
