#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcivoice/dataset.hpp"
#include "mcivoice/matrix.hpp"

namespace mcivoice {

enum class ClassifierKind { kKnn, kSvm, kMlp, kCnn, kMajority };

const char* to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view text);

struct KnnParams {
  std::size_t k = 1;
};

struct SvmParams {
  double c = 1.0;
  double tolerance = 1e-3;
  std::size_t max_iters = 100000;  // successful pair updates before giving up
};

struct MlpParams {
  std::vector<std::size_t> hidden = {100, 100};
  double learning_rate = 1.0;
  std::size_t epochs = 300;
  std::uint64_t seed = 1;
};

struct CnnParams {
  std::size_t n_filters = 20;
  std::size_t conv_size = 3;
  std::size_t pool_size = 2;
  std::vector<std::size_t> dense = {20};
  double learning_rate = 1.0;
  std::size_t epochs = 300;
  std::uint64_t seed = 1;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kKnn;
  KnnParams knn;
  SvmParams svm;
  MlpParams mlp;
  CnnParams cnn;

  static ClassifierSpec of(ClassifierKind kind) {
    ClassifierSpec s;
    s.kind = kind;
    return s;
  }
  std::string describe() const;
};

// ---- SMO ----------------------------------------------------------------

struct SmoResult {
  std::vector<double> alphas;
  std::vector<double> w;
  double b = 0.0;
  std::size_t iterations = 0;
};

// Platt's SMO for a linear-kernel soft-margin SVM. Labels are +1 / -1.
// Throws kSmoNotConverged once params.max_iters pair updates are exceeded.
SmoResult smo_train(const Matrix& x, std::span<const int> y_pm1, const SvmParams& params);

// Largest KKT violation over the training points for the given solution.
double kkt_residual(const SmoResult& r, const Matrix& x, std::span<const int> y_pm1, double c);

// ---- models -------------------------------------------------------------

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;
};

struct KnnModel {
  std::size_t k = 1;
  Matrix x;
  std::vector<int> labels;
};

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  std::size_t support_vectors = 0;
};

struct MlpModel {
  std::vector<DenseLayer> layers;  // hidden layers (sigmoid) then a 2-way softmax layer
};

struct CnnModel {
  std::size_t side = 0;
  std::size_t n_filters = 0;
  std::size_t conv_size = 0;
  std::size_t pool_size = 0;
  std::vector<double> conv_w;  // n_filters x conv_size x conv_size
  std::vector<double> conv_b;
  std::vector<DenseLayer> dense;  // hidden dense layers then the softmax layer
};

struct MajorityModel {
  int label = 0;
};

struct TrainedModel {
  ClassifierSpec spec;
  std::size_t input_dim = 0;
  std::variant<KnnModel, SvmModel, MlpModel, CnnModel, MajorityModel> params;
  std::vector<double> loss_history;  // accepted full-batch losses (MLP / CNN)
};

// Expects a complete (imputed) dataset, normally min-max normalised.
TrainedModel train(const ClassifierSpec& spec, const Dataset& ds);

// Returns 0 (CR) or 1 (MCI). Throws kDimensionMismatch on a wrong-size input.
int predict(const TrainedModel& model, std::span<const double> x);
std::vector<int> predict_all(const TrainedModel& model, const Matrix& x);

// Square side ceil(sqrt(D)); row-major fill with zero padding.
Matrix reshape_to_grid(std::span<const double> x);

// Softmax class scores for one grid.
std::vector<double> cnn_forward(const CnnModel& model, const Matrix& grid);

// Activation shapes after conv, pool, flatten, each dense layer.
std::vector<std::vector<std::size_t>> cnn_shape_chain(const CnnParams& params, std::size_t input_dim);

// Untrained network with weights drawn uniformly from [-0.5, 0.5].
TrainedModel init_network(const ClassifierSpec& spec, std::size_t input_dim);
std::size_t parameter_count(const TrainedModel& model);
std::vector<double> get_parameters(const TrainedModel& model);
void set_parameters(TrainedModel& model, std::span<const double> theta);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Mean softmax cross-entropy and its gradient by backpropagation.
LossGradient loss_and_gradient(const TrainedModel& model, const Matrix& x,
                               std::span<const int> labels);

// Max relative difference between backprop and central differences (h = 1e-5)
// at the seeded initial point. Networks only, at most 200 parameters.
double gradient_check(const ClassifierSpec& spec, const Dataset& ds);

// Self-describing JSON, exact round trip.
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

}  // namespace mcivoice
