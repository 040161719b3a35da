#include <algorithm>
#include <cmath>
#include <string>

#include "mcivoice/classifiers.hpp"
#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Pairwise dual coordinate descent with second-order working-set selection.
class Smo {
 public:
  Smo(const Matrix& x, std::span<const int> y, const SvmParams& p)
      : x_(x), y_(y), c_(p.c), tol_(p.tolerance), max_iters_(p.max_iters),
        alpha_(x.rows, 0.0), grad_(x.rows, -1.0), gram_(x.rows, x.rows) {
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = i; j < x.rows; ++j) gram_(i, j) = gram_(j, i) = dot(x.row(i), x.row(j));
  }

  SmoResult run() {
    const std::size_t n = x_.rows;
    std::size_t i = 0, j = 0;
    while (select(i, j)) {
      if (++iterations_ > max_iters_) {
        throw Error(ErrorCode::kSmoNotConverged,
                    "SMO exceeded " + std::to_string(max_iters_) + " iterations");
      }
      update(i, j);
    }
    SmoResult r;
    r.alphas = alpha_;
    r.b = bias();
    r.iterations = iterations_;
    r.w.assign(x_.cols, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha_[t] == 0.0) continue;
      const auto xt = x_.row(t);
      for (std::size_t d = 0; d < x_.cols; ++d) r.w[d] += alpha_[t] * y_[t] * xt[d];
    }
    return r;
  }

 private:
  static constexpr double kTau = 1e-12;

  bool in_up(std::size_t t) const { return y_[t] > 0 ? alpha_[t] < c_ : alpha_[t] > 0.0; }
  bool in_low(std::size_t t) const { return y_[t] > 0 ? alpha_[t] > 0.0 : alpha_[t] < c_; }

  // Returns false once the maximal violation drops below the tolerance.
  bool select(std::size_t& i_out, std::size_t& j_out) const {
    const std::size_t n = x_.rows;
    double g_max = -INFINITY;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y_[t] * grad_[t] > g_max) {
        g_max = -y_[t] * grad_[t];
        i = t;
      }
    }
    if (i == n) return false;
    double g_min = INFINITY;
    double best = INFINITY;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y_[t] * grad_[t];
      g_min = std::min(g_min, v);
      const double b = g_max - v;
      if (b <= 0.0) continue;
      double a = gram_(i, i) + gram_(t, t) - 2.0 * gram_(i, t);
      if (a <= 0.0) a = kTau;
      if (-b * b / a < best) {
        best = -b * b / a;
        j = t;
      }
    }
    if (j == n || g_max - g_min < tol_) return false;
    i_out = i;
    j_out = j;
    return true;
  }

  void update(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i], old_j = alpha_[j];
    double quad = gram_(i, i) + gram_(j, j) - 2.0 * gram_(i, j);
    if (quad <= 0.0) quad = kTau;
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < x_.rows; ++t) {
      grad_[t] += y_[t] * (y_[i] * gram_(t, i) * di + y_[j] * gram_(t, j) * dj);
    }
  }

  // Average over free vectors, else the midpoint of the feasible interval.
  double bias() const {
    double sum = 0.0, ub = INFINITY, lb = -INFINITY;
    std::size_t free = 0;
    for (std::size_t t = 0; t < x_.rows; ++t) {
      const double yg = y_[t] * grad_[t];
      if (alpha_[t] > 0.0 && alpha_[t] < c_) {
        sum += yg;
        ++free;
      } else if ((alpha_[t] >= c_) == (y_[t] > 0)) {
        lb = std::max(lb, yg);
      } else {
        ub = std::min(ub, yg);
      }
    }
    const double rho = free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
    return -rho;
  }

  const Matrix& x_;
  std::span<const int> y_;
  double c_;
  double tol_;
  std::size_t max_iters_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  Matrix gram_;
  std::size_t iterations_ = 0;
};

}  // namespace

SmoResult smo_train(const Matrix& x, std::span<const int> y_pm1, const SvmParams& params) {
  if (y_pm1.size() != x.rows || x.rows < 2) {
    throw Error(ErrorCode::kInvalidArgument, "SMO needs at least two labelled rows");
  }
  for (int y : y_pm1) {
    if (y != 1 && y != -1) throw Error(ErrorCode::kInvalidArgument, "SMO labels must be +1/-1");
  }
  if (!(params.c > 0.0) || !(params.tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SVM C and tolerance must be positive");
  }
  return Smo(x, y_pm1, params).run();
}

double kkt_residual(const SmoResult& r, const Matrix& x, std::span<const int> y_pm1, double c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double margin = y_pm1[i] * (dot(r.w, x.row(i)) + r.b);
    const double a = r.alphas[i];
    double v = 0.0;
    if (a <= 0.0) v = std::max(0.0, 1.0 - margin);
    else if (a >= c) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace mcivoice
