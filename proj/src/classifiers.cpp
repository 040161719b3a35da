#include "mcivoice/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json_io.hpp"
#include "mcivoice/error.hpp"

namespace mcivoice {

using nlohmann::json;

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kKnn: return "knn";
    case ClassifierKind::kSvm: return "svm";
    case ClassifierKind::kMlp: return "mlp";
    case ClassifierKind::kCnn: return "cnn";
    case ClassifierKind::kMajority: return "majority";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view text) {
  for (auto k : {ClassifierKind::kKnn, ClassifierKind::kSvm, ClassifierKind::kMlp,
                 ClassifierKind::kCnn, ClassifierKind::kMajority}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown classifier '" + std::string(text) + "'");
}

std::string ClassifierSpec::describe() const { return detail::spec_to_json(*this).dump(); }

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Uniform [-0.5, 0.5) from the top 53 bits; identical on every platform.
class WeightRng {
 public:
  explicit WeightRng(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 - 0.5; }

 private:
  std::mt19937_64 gen_;
};

DenseLayer make_layer(std::size_t in, std::size_t out, WeightRng& rng) {
  DenseLayer l{in, out, std::vector<double>(in * out), std::vector<double>(out)};
  for (double& v : l.w) v = rng.next();
  for (double& v : l.b) v = rng.next();
  return l;
}

std::vector<DenseLayer> make_stack(std::size_t in, const std::vector<std::size_t>& hidden,
                                   WeightRng& rng) {
  std::vector<DenseLayer> layers;
  std::size_t width = in;
  for (std::size_t h : hidden) {
    layers.push_back(make_layer(width, h, rng));
    width = h;
  }
  layers.push_back(make_layer(width, 2, rng));
  return layers;
}

// acts[0] is the input; acts[l + 1] the output of layer l (sigmoid, or
// softmax probabilities for the last layer).
void dense_forward(const std::vector<DenseLayer>& layers, std::span<const double> in,
                   std::vector<std::vector<double>>& acts) {
  acts.resize(layers.size() + 1);
  acts[0].assign(in.begin(), in.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    auto& out = acts[l + 1];
    out.assign(layer.out, 0.0);
    const auto& a = acts[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      double z = layer.b[o];
      const double* row = layer.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) z += row[i] * a[i];
      out[o] = z;
    }
    if (l + 1 < layers.size()) {
      for (double& v : out) v = sigmoid(v);
    } else {
      const double m = *std::max_element(out.begin(), out.end());
      double s = 0.0;
      for (double& v : out) s += (v = std::exp(v - m));
      for (double& v : out) v /= s;
    }
  }
}

double sample_loss(const std::vector<double>& probs, int label) {
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

// Accumulates parameter gradients into grads (same shapes as layers) and
// optionally returns dLoss/dInput.
void dense_backward(const std::vector<DenseLayer>& layers,
                    const std::vector<std::vector<double>>& acts, int label,
                    std::vector<DenseLayer>& grads, std::vector<double>* d_input) {
  std::vector<double> delta = acts.back();
  delta[static_cast<std::size_t>(label)] -= 1.0;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = grads[l];
    const auto& a = acts[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      g.b[o] += delta[o];
      double* grow = g.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) grow[i] += delta[o] * a[i];
    }
    if (l == 0 && d_input == nullptr) break;
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
    }
    if (l > 0) {
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] *= a[i] * (1.0 - a[i]);
    } else {
      *d_input = std::move(prev);
      break;
    }
    delta = std::move(prev);
  }
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> g;
  for (const auto& l : layers) {
    g.push_back({l.in, l.out, std::vector<double>(l.w.size(), 0.0), std::vector<double>(l.b.size(), 0.0)});
  }
  return g;
}

struct CnnCache {
  std::size_t conv_side = 0;
  std::size_t pool_side = 0;
  std::vector<double> conv_act;           // F x cs x cs
  std::vector<double> pooled;             // F x ps x ps
  std::vector<std::size_t> argmax;        // index into conv_act per pooled unit
  std::vector<std::vector<double>> acts;  // dense stack activations
};

void check_cnn_geometry(std::size_t side, std::size_t conv, std::size_t pool) {
  if (conv == 0 || pool == 0 || side < conv || (side - conv + 1) < pool) {
    throw Error(ErrorCode::kInvalidArgument, "grid smaller than the convolution/pool kernel");
  }
}

void cnn_forward_cached(const CnnModel& m, const Matrix& grid, CnnCache& c) {
  const std::size_t s = m.side, k = m.conv_size, p = m.pool_size, nf = m.n_filters;
  check_cnn_geometry(s, k, p);
  c.conv_side = s - k + 1;
  c.pool_side = c.conv_side / p;
  const std::size_t cs = c.conv_side, ps = c.pool_side;
  c.conv_act.assign(nf * cs * cs, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    const double* w = m.conv_w.data() + f * k * k;
    for (std::size_t i = 0; i < cs; ++i) {
      for (std::size_t j = 0; j < cs; ++j) {
        double z = m.conv_b[f];
        for (std::size_t u = 0; u < k; ++u)
          for (std::size_t v = 0; v < k; ++v) z += w[u * k + v] * grid(i + u, j + v);
        c.conv_act[(f * cs + i) * cs + j] = sigmoid(z);
      }
    }
  }
  c.pooled.assign(nf * ps * ps, 0.0);
  c.argmax.assign(nf * ps * ps, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t pi = 0; pi < ps; ++pi) {
      for (std::size_t pj = 0; pj < ps; ++pj) {
        std::size_t best = (f * cs + pi * p) * cs + pj * p;
        for (std::size_t u = 0; u < p; ++u) {
          for (std::size_t v = 0; v < p; ++v) {
            const std::size_t idx = (f * cs + pi * p + u) * cs + pj * p + v;
            if (c.conv_act[idx] > c.conv_act[best]) best = idx;
          }
        }
        const std::size_t out = (f * ps + pi) * ps + pj;
        c.pooled[out] = c.conv_act[best];
        c.argmax[out] = best;
      }
    }
  }
  dense_forward(m.dense, c.pooled, c.acts);
}

std::size_t grid_side(std::size_t dim) {
  auto s = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
  while (s * s < dim) ++s;
  while (s > 1 && (s - 1) * (s - 1) >= dim) --s;
  return std::max<std::size_t>(s, 1);
}

void check_dim(const TrainedModel& model, std::size_t d) {
  if (d != model.input_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(model.input_dim) +
                                                   " features, got " + std::to_string(d));
  }
}

void append_stack(std::vector<double>& out, const std::vector<DenseLayer>& layers) {
  for (const auto& l : layers) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
}

std::size_t read_stack(std::vector<DenseLayer>& layers, std::span<const double> theta, std::size_t pos) {
  for (auto& l : layers) {
    std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(pos), l.w.size(), l.w.begin());
    pos += l.w.size();
    std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(pos), l.b.size(), l.b.begin());
    pos += l.b.size();
  }
  return pos;
}

void train_network(TrainedModel& model, const Matrix& x, std::span<const int> labels,
                   double learning_rate, std::size_t epochs) {
  auto theta = get_parameters(model);
  LossGradient current = loss_and_gradient(model, x, labels);
  if (!std::isfinite(current.loss)) {
    throw Error(ErrorCode::kNonFiniteLoss, "initial training loss is not finite");
  }
  model.loss_history.push_back(current.loss);
  double lr = learning_rate;
  std::vector<double> candidate(theta.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < theta.size(); ++i) candidate[i] = theta[i] - lr * current.gradient[i];
    set_parameters(model, candidate);
    LossGradient next = loss_and_gradient(model, x, labels);
    if (std::isfinite(next.loss) && next.loss <= current.loss) {
      theta.swap(candidate);
      current = std::move(next);
    } else {
      lr *= 0.5;
      set_parameters(model, theta);
    }
    model.loss_history.push_back(current.loss);
  }
  set_parameters(model, theta);
}

}  // namespace

// ---- networks -----------------------------------------------------------

Matrix reshape_to_grid(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot reshape an empty vector");
  const std::size_t s = grid_side(x.size());
  Matrix g(s, s, 0.0);
  std::copy(x.begin(), x.end(), g.data.begin());
  return g;
}

std::vector<double> cnn_forward(const CnnModel& model, const Matrix& grid) {
  if (grid.rows != model.side || grid.cols != model.side) {
    throw Error(ErrorCode::kDimensionMismatch, "grid side does not match the model");
  }
  CnnCache c;
  cnn_forward_cached(model, grid, c);
  return c.acts.back();
}

std::vector<std::vector<std::size_t>> cnn_shape_chain(const CnnParams& p, std::size_t input_dim) {
  const std::size_t s = grid_side(input_dim);
  check_cnn_geometry(s, p.conv_size, p.pool_size);
  const std::size_t cs = s - p.conv_size + 1;
  const std::size_t ps = cs / p.pool_size;
  std::vector<std::vector<std::size_t>> chain;
  chain.push_back({cs, cs, p.n_filters});
  chain.push_back({ps, ps, p.n_filters});
  chain.push_back({ps * ps * p.n_filters});
  for (std::size_t d : p.dense) chain.push_back({d});
  chain.push_back({2});
  return chain;
}

TrainedModel init_network(const ClassifierSpec& spec, std::size_t input_dim) {
  if (input_dim == 0) throw Error(ErrorCode::kInvalidArgument, "input dimension must be positive");
  TrainedModel model;
  model.spec = spec;
  model.input_dim = input_dim;
  if (spec.kind == ClassifierKind::kMlp) {
    WeightRng rng(spec.mlp.seed);
    model.params = MlpModel{make_stack(input_dim, spec.mlp.hidden, rng)};
  } else if (spec.kind == ClassifierKind::kCnn) {
    const CnnParams& p = spec.cnn;
    if (p.n_filters == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one filter");
    WeightRng rng(p.seed);
    CnnModel m;
    m.side = grid_side(input_dim);
    check_cnn_geometry(m.side, p.conv_size, p.pool_size);
    m.n_filters = p.n_filters;
    m.conv_size = p.conv_size;
    m.pool_size = p.pool_size;
    m.conv_w.resize(p.n_filters * p.conv_size * p.conv_size);
    m.conv_b.resize(p.n_filters);
    for (double& v : m.conv_w) v = rng.next();
    for (double& v : m.conv_b) v = rng.next();
    const std::size_t ps = (m.side - p.conv_size + 1) / p.pool_size;
    m.dense = make_stack(ps * ps * p.n_filters, p.dense, rng);
    model.params = std::move(m);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "init_network needs an MLP or CNN spec");
  }
  return model;
}

std::vector<double> get_parameters(const TrainedModel& model) {
  std::vector<double> out;
  if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
    append_stack(out, mlp->layers);
  } else if (const auto* cnn = std::get_if<CnnModel>(&model.params)) {
    out.insert(out.end(), cnn->conv_w.begin(), cnn->conv_w.end());
    out.insert(out.end(), cnn->conv_b.begin(), cnn->conv_b.end());
    append_stack(out, cnn->dense);
  }
  return out;
}

std::size_t parameter_count(const TrainedModel& model) { return get_parameters(model).size(); }

void set_parameters(TrainedModel& model, std::span<const double> theta) {
  if (theta.size() != parameter_count(model)) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector has the wrong length");
  }
  if (auto* mlp = std::get_if<MlpModel>(&model.params)) {
    read_stack(mlp->layers, theta, 0);
  } else if (auto* cnn = std::get_if<CnnModel>(&model.params)) {
    std::size_t pos = 0;
    std::copy_n(theta.begin(), cnn->conv_w.size(), cnn->conv_w.begin());
    pos += cnn->conv_w.size();
    std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(pos), cnn->conv_b.size(), cnn->conv_b.begin());
    pos += cnn->conv_b.size();
    read_stack(cnn->dense, theta, pos);
  }
}

LossGradient loss_and_gradient(const TrainedModel& model, const Matrix& x,
                               std::span<const int> labels) {
  check_dim(model, x.cols);
  if (labels.size() != x.rows || x.rows == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need one label per row");
  }
  LossGradient out;
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
    auto grads = zero_like(mlp->layers);
    std::vector<std::vector<double>> acts;
    for (std::size_t r = 0; r < x.rows; ++r) {
      dense_forward(mlp->layers, x.row(r), acts);
      out.loss += sample_loss(acts.back(), labels[r]);
      dense_backward(mlp->layers, acts, labels[r], grads, nullptr);
    }
    append_stack(out.gradient, grads);
  } else if (const auto* cnn = std::get_if<CnnModel>(&model.params)) {
    const std::size_t k = cnn->conv_size, nf = cnn->n_filters;
    std::vector<double> gw(cnn->conv_w.size(), 0.0), gb(cnn->conv_b.size(), 0.0);
    auto grads = zero_like(cnn->dense);
    CnnCache c;
    std::vector<double> d_pooled;
    for (std::size_t r = 0; r < x.rows; ++r) {
      const Matrix grid = reshape_to_grid(x.row(r));
      cnn_forward_cached(*cnn, grid, c);
      out.loss += sample_loss(c.acts.back(), labels[r]);
      dense_backward(cnn->dense, c.acts, labels[r], grads, &d_pooled);
      const std::size_t cs = c.conv_side;
      std::vector<double> d_conv(c.conv_act.size(), 0.0);
      for (std::size_t u = 0; u < d_pooled.size(); ++u) d_conv[c.argmax[u]] += d_pooled[u];
      for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t i = 0; i < cs; ++i) {
          for (std::size_t j = 0; j < cs; ++j) {
            const std::size_t idx = (f * cs + i) * cs + j;
            if (d_conv[idx] == 0.0) continue;
            const double a = c.conv_act[idx];
            const double dz = d_conv[idx] * a * (1.0 - a);
            gb[f] += dz;
            for (std::size_t u = 0; u < k; ++u)
              for (std::size_t v = 0; v < k; ++v) gw[(f * k + u) * k + v] += dz * grid(i + u, j + v);
          }
        }
      }
    }
    out.gradient = std::move(gw);
    out.gradient.insert(out.gradient.end(), gb.begin(), gb.end());
    append_stack(out.gradient, grads);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "loss_and_gradient needs an MLP or CNN model");
  }
  out.loss *= inv_n;
  for (double& g : out.gradient) g *= inv_n;
  return out;
}

double gradient_check(const ClassifierSpec& spec, const Dataset& ds) {
  TrainedModel model = init_network(spec, ds.n_features());
  const auto theta = get_parameters(model);
  if (theta.size() > 200) {
    throw Error(ErrorCode::kInvalidArgument, "gradient check limited to 200 parameters");
  }
  const auto analytic = loss_and_gradient(model, ds.x, ds.labels).gradient;
  constexpr double h = 1e-5;
  double worst = 0.0;
  auto probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    set_parameters(model, probe);
    const double up = loss_and_gradient(model, ds.x, ds.labels).loss;
    probe[i] = theta[i] - h;
    set_parameters(model, probe);
    const double down = loss_and_gradient(model, ds.x, ds.labels).loss;
    probe[i] = theta[i];
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max(std::abs(numeric) + std::abs(analytic[i]), 1e-8);
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

// ---- train / predict ----------------------------------------------------

TrainedModel train(const ClassifierSpec& spec, const Dataset& ds) {
  if (ds.n_rows() < 2 || ds.n_features() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "training needs at least two rows and one feature");
  }
  if (ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "training needs both classes");
  }
  TrainedModel model;
  model.spec = spec;
  model.input_dim = ds.n_features();
  switch (spec.kind) {
    case ClassifierKind::kKnn: {
      if (spec.knn.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
      model.params = KnnModel{spec.knn.k, ds.x, ds.labels};
      break;
    }
    case ClassifierKind::kSvm: {
      std::vector<int> y(ds.labels.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = ds.labels[i] == 1 ? 1 : -1;
      const SmoResult r = smo_train(ds.x, y, spec.svm);
      const auto svs = static_cast<std::size_t>(
          std::count_if(r.alphas.begin(), r.alphas.end(), [](double a) { return a > 0.0; }));
      model.params = SvmModel{r.w, r.b, svs};
      break;
    }
    case ClassifierKind::kMlp: {
      model = init_network(spec, ds.n_features());
      train_network(model, ds.x, ds.labels, spec.mlp.learning_rate, spec.mlp.epochs);
      break;
    }
    case ClassifierKind::kCnn: {
      model = init_network(spec, ds.n_features());
      train_network(model, ds.x, ds.labels, spec.cnn.learning_rate, spec.cnn.epochs);
      break;
    }
    case ClassifierKind::kMajority: {
      model.params = MajorityModel{ds.count_label(1) > ds.count_label(0) ? 1 : 0};
      break;
    }
  }
  return model;
}

int predict(const TrainedModel& model, std::span<const double> x) {
  check_dim(model, x.size());
  if (const auto* knn = std::get_if<KnnModel>(&model.params)) {
    const std::size_t n = knn->x.rows;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = knn->x.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) d += (row[j] - x[j]) * (row[j] - x[j]);
      dist[i] = {d, i};
    }
    const std::size_t k = std::min(knn->k, n);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    int votes[2] = {0, 0};
    for (std::size_t i = 0; i < k; ++i) ++votes[knn->labels[dist[i].second]];
    if (votes[0] == votes[1]) return knn->labels[dist[0].second];
    return votes[1] > votes[0] ? 1 : 0;
  }
  if (const auto* svm = std::get_if<SvmModel>(&model.params)) {
    double f = svm->b;
    for (std::size_t j = 0; j < x.size(); ++j) f += svm->w[j] * x[j];
    return f > 0.0 ? 1 : 0;
  }
  if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
    std::vector<std::vector<double>> acts;
    dense_forward(mlp->layers, x, acts);
    return acts.back()[1] > acts.back()[0] ? 1 : 0;
  }
  if (const auto* cnn = std::get_if<CnnModel>(&model.params)) {
    const auto p = cnn_forward(*cnn, reshape_to_grid(x));
    return p[1] > p[0] ? 1 : 0;
  }
  return std::get<MajorityModel>(model.params).label;
}

std::vector<int> predict_all(const TrainedModel& model, const Matrix& x) {
  std::vector<int> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(model, x.row(i));
  return out;
}

// ---- serialisation ------------------------------------------------------

namespace detail {

json spec_to_json(const ClassifierSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"knn", {{"k", s.knn.k}}},
              {"svm", {{"c", s.svm.c}, {"tolerance", s.svm.tolerance}, {"max_iters", s.svm.max_iters}}},
              {"mlp",
               {{"hidden", s.mlp.hidden},
                {"learning_rate", s.mlp.learning_rate},
                {"epochs", s.mlp.epochs},
                {"seed", s.mlp.seed}}},
              {"cnn",
               {{"n_filters", s.cnn.n_filters},
                {"conv_size", s.cnn.conv_size},
                {"pool_size", s.cnn.pool_size},
                {"dense", s.cnn.dense},
                {"learning_rate", s.cnn.learning_rate},
                {"epochs", s.cnn.epochs},
                {"seed", s.cnn.seed}}}};
}

ClassifierSpec spec_from_json(const json& j) {
  ClassifierSpec s;
  s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
  s.knn.k = j.at("knn").at("k");
  const auto& svm = j.at("svm");
  s.svm = {svm.at("c"), svm.at("tolerance"), svm.at("max_iters")};
  const auto& mlp = j.at("mlp");
  s.mlp = {mlp.at("hidden").get<std::vector<std::size_t>>(), mlp.at("learning_rate"),
           mlp.at("epochs"), mlp.at("seed")};
  const auto& cnn = j.at("cnn");
  s.cnn = {cnn.at("n_filters"), cnn.at("conv_size"), cnn.at("pool_size"),
           cnn.at("dense").get<std::vector<std::size_t>>(), cnn.at("learning_rate"),
           cnn.at("epochs"), cnn.at("seed")};
  return s;
}

}  // namespace detail

namespace {

json stack_to_json(const std::vector<DenseLayer>& layers) {
  json arr = json::array();
  for (const auto& l : layers) arr.push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
  return arr;
}

std::vector<DenseLayer> stack_from_json(const json& arr) {
  std::vector<DenseLayer> layers;
  for (const auto& l : arr) {
    layers.push_back({l.at("in"), l.at("out"), l.at("w").get<std::vector<double>>(),
                      l.at("b").get<std::vector<double>>()});
  }
  return layers;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  json j;
  j["format"] = "mcivoice-model-1";
  j["spec"] = detail::spec_to_json(model.spec);
  j["input_dim"] = model.input_dim;
  j["classes"] = {"CR", "MCI"};
  json p;
  if (const auto* knn = std::get_if<KnnModel>(&model.params)) {
    p = {{"k", knn->k}, {"rows", knn->x.rows}, {"cols", knn->x.cols}, {"x", knn->x.data},
         {"labels", knn->labels}};
  } else if (const auto* svm = std::get_if<SvmModel>(&model.params)) {
    p = {{"w", svm->w}, {"b", svm->b}, {"support_vectors", svm->support_vectors}};
  } else if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
    p = {{"layers", stack_to_json(mlp->layers)}};
  } else if (const auto* cnn = std::get_if<CnnModel>(&model.params)) {
    p = {{"side", cnn->side},         {"n_filters", cnn->n_filters}, {"conv_size", cnn->conv_size},
         {"pool_size", cnn->pool_size}, {"conv_w", cnn->conv_w},     {"conv_b", cnn->conv_b},
         {"dense", stack_to_json(cnn->dense)}};
  } else {
    p = {{"label", std::get<MajorityModel>(model.params).label}};
  }
  j["params"] = std::move(p);
  return j.dump(1);
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrainedModel m;
    m.spec = detail::spec_from_json(j.at("spec"));
    m.input_dim = j.at("input_dim");
    const json& p = j.at("params");
    switch (m.spec.kind) {
      case ClassifierKind::kKnn: {
        KnnModel k;
        k.k = p.at("k");
        k.x.rows = p.at("rows");
        k.x.cols = p.at("cols");
        k.x.data = p.at("x").get<std::vector<double>>();
        k.labels = p.at("labels").get<std::vector<int>>();
        m.params = std::move(k);
        break;
      }
      case ClassifierKind::kSvm:
        m.params = SvmModel{p.at("w").get<std::vector<double>>(), p.at("b"), p.at("support_vectors")};
        break;
      case ClassifierKind::kMlp:
        m.params = MlpModel{stack_from_json(p.at("layers"))};
        break;
      case ClassifierKind::kCnn: {
        CnnModel c;
        c.side = p.at("side");
        c.n_filters = p.at("n_filters");
        c.conv_size = p.at("conv_size");
        c.pool_size = p.at("pool_size");
        c.conv_w = p.at("conv_w").get<std::vector<double>>();
        c.conv_b = p.at("conv_b").get<std::vector<double>>();
        c.dense = stack_from_json(p.at("dense"));
        m.params = std::move(c);
        break;
      }
      case ClassifierKind::kMajority:
        m.params = MajorityModel{p.at("label")};
        break;
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedModel, std::string("bad model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kFileUnreadable, "cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace mcivoice
