#include "nmm/losses.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Cholesky>

namespace nmm {

namespace {

void check_dim(const Vector& w, const Dataset& d) {
  if (w.size() != d.p()) {
    throw DimensionError("weight vector has length " + std::to_string(w.size()) +
                         ", dataset has p = " + std::to_string(d.p()));
  }
}

void check_classification(const Dataset& d) {
  if (d.task() != Task::Classification) {
    throw std::invalid_argument("logistic loss requires classification labels in {-1, +1}");
  }
}

// log(1 + exp(z)) without overflow.
double log1p_exp(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double frobenius_sq(const SparseRowMatrix& x) {
  double s = 0.0;
  for (Index k = 0; k < x.outerSize(); ++k) {
    for (SparseRowMatrix::InnerIterator it(x, k); it; ++it) s += it.value() * it.value();
  }
  return s;
}

}  // namespace

Dataset::Dataset(SparseRowMatrix design, Vector targets, Task task)
    : design_(std::move(design)), targets_(std::move(targets)), task_(task) {
  if (design_.rows() < 1 || design_.cols() < 1) {
    throw std::invalid_argument("dataset needs n >= 1 and p >= 1");
  }
  if (targets_.size() != design_.rows()) {
    throw DimensionError("targets length " + std::to_string(targets_.size()) +
                         " does not match n = " + std::to_string(design_.rows()));
  }
  design_.makeCompressed();
  for (Index k = 0; k < design_.nonZeros(); ++k) {
    if (!std::isfinite(design_.valuePtr()[k])) {
      throw std::invalid_argument("design matrix has a non-finite entry");
    }
  }
  for (Index i = 0; i < targets_.size(); ++i) {
    const double y = targets_[i];
    if (!std::isfinite(y)) throw std::invalid_argument("non-finite target");
    if (task_ == Task::Classification && y != 1.0 && y != -1.0) {
      throw std::invalid_argument("classification label must be -1 or +1, got " +
                                  std::to_string(y));
    }
  }
}

Dataset Dataset::from_dense(const Matrix& design, Vector targets, Task task) {
  SparseRowMatrix sparse = design.sparseView(0.0, 0.0);
  return Dataset(std::move(sparse), std::move(targets), task);
}

double ls_value(const Vector& w, const Dataset& d) {
  check_dim(w, d);
  const Vector r = d.design() * w - d.targets();
  return 0.5 * r.squaredNorm() / static_cast<double>(d.n());
}

Vector ls_gradient(const Vector& w, const Dataset& d) {
  check_dim(w, d);
  const Vector r = d.design() * w - d.targets();
  return d.design().transpose() * r / static_cast<double>(d.n());
}

double ls_lipschitz(const Dataset& d) {
  const double n = static_cast<double>(d.n());
  const double trace = frobenius_sq(d.design());
  if (trace == 0.0) throw NumericalError("all-zero design matrix: L_f = 0 is degenerate");

  constexpr int kMaxSteps = 500;
  constexpr double kRelTol = 1e-8;

  const Index p = d.p();
  Vector v(p);
  for (Index j = 0; j < p; ++j) v[j] = 1.0 + 0.25 * std::sin(static_cast<double>(j + 1));
  v.normalize();

  double theta = 0.0;
  for (int step = 0; step < kMaxSteps; ++step) {
    const Vector xv = d.design() * v;
    Vector next = d.design().transpose() * xv;
    const double rayleigh = xv.squaredNorm();  // v^T X^T X v with ||v|| = 1
    const double norm = next.norm();
    if (norm == 0.0) {
      // Start vector in the null space; restart along a coordinate with mass.
      v.setZero();
      v[step % p] = 1.0;
      continue;
    }
    if (step > 0 && std::abs(rayleigh - theta) <= kRelTol * rayleigh) return rayleigh / n;
    theta = rayleigh;
    v = next / norm;
  }
  return trace / n;
}

double logistic_value(const Vector& w, const Dataset& d) {
  check_dim(w, d);
  check_classification(d);
  const Vector margin = d.design() * w;
  double s = 0.0;
  for (Index i = 0; i < d.n(); ++i) s += log1p_exp(-d.targets()[i] * margin[i]);
  return s / static_cast<double>(d.n());
}

Vector logistic_gradient(const Vector& w, const Dataset& d) {
  check_dim(w, d);
  check_classification(d);
  const Vector margin = d.design() * w;
  Vector coef(d.n());
  for (Index i = 0; i < d.n(); ++i) {
    const double y = d.targets()[i];
    coef[i] = -y * sigmoid(-y * margin[i]);
  }
  return d.design().transpose() * coef / static_cast<double>(d.n());
}

double logistic_lipschitz(const Dataset& d) {
  check_classification(d);
  const double s = frobenius_sq(d.design());
  if (s == 0.0) throw NumericalError("all-zero design matrix: L_f = 0 is degenerate");
  return s / (4.0 * static_cast<double>(d.n()));
}

Vector per_sample_lipschitz(LossKind kind, const Dataset& d) {
  Vector out(d.n());
  const double scale = kind == LossKind::Logistic ? 0.25 : 1.0;
  for (Index i = 0; i < d.n(); ++i) out[i] = scale * d.design().row(i).squaredNorm();
  return out;
}

double ls_strong_convexity(const Dataset& d) {
  if (d.p() > d.n()) return 0.0;
  const Matrix x = Matrix(d.design());
  const Matrix gram = x.transpose() * x / static_cast<double>(d.n());
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) return 0.0;

  Vector v = Vector::Ones(d.p()).normalized();
  double theta = 0.0;
  for (int step = 0; step < 1000; ++step) {
    Vector next = llt.solve(v);
    const double norm = next.norm();
    if (!std::isfinite(norm) || norm == 0.0) return 0.0;
    next /= norm;
    const double rayleigh = next.dot(gram * next);
    v = std::move(next);
    if (step > 0 && std::abs(rayleigh - theta) <= 1e-12 * std::abs(rayleigh)) {
      return std::max(rayleigh, 0.0);
    }
    theta = rayleigh;
  }
  return std::max(theta, 0.0);
}

SmoothLoss::SmoothLoss(LossKind kind, std::shared_ptr<const Dataset> data)
    : kind_(kind), data_(std::move(data)) {
  if (!data_) throw std::invalid_argument("SmoothLoss needs a dataset");
  lipschitz_ = kind_ == LossKind::LeastSquares ? ls_lipschitz(*data_) : logistic_lipschitz(*data_);
}

double SmoothLoss::value(const Vector& w) const {
  return kind_ == LossKind::LeastSquares ? ls_value(w, *data_) : logistic_value(w, *data_);
}

Vector SmoothLoss::gradient(const Vector& w) const {
  return kind_ == LossKind::LeastSquares ? ls_gradient(w, *data_) : logistic_gradient(w, *data_);
}

double SmoothLoss::value_and_gradient(const Vector& w, Vector& grad) const {
  const Dataset& d = *data_;
  check_dim(w, d);
  const double n = static_cast<double>(d.n());
  const Vector margin = d.design() * w;
  if (kind_ == LossKind::LeastSquares) {
    const Vector r = margin - d.targets();
    grad = d.design().transpose() * r / n;
    return 0.5 * r.squaredNorm() / n;
  }
  Vector coef(d.n());
  double s = 0.0;
  for (Index i = 0; i < d.n(); ++i) {
    const double y = d.targets()[i];
    const double z = -y * margin[i];
    s += log1p_exp(z);
    coef[i] = -y * sigmoid(z);
  }
  grad = d.design().transpose() * coef / n;
  return s / n;
}

}  // namespace nmm
