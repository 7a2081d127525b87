#pragma once

#include <memory>

#include "nmm/common.hpp"

namespace nmm {

enum class Task { Regression, Classification };

// Training data {x_i, y_i}. Immutable once constructed; the constructor
// enforces finiteness and, for classification, labels in {-1, +1}.
class Dataset {
 public:
  Dataset(SparseRowMatrix design, Vector targets, Task task);

  static Dataset from_dense(const Matrix& design, Vector targets, Task task);

  const SparseRowMatrix& design() const noexcept { return design_; }
  const Vector& targets() const noexcept { return targets_; }
  Task task() const noexcept { return task_; }
  Index n() const noexcept { return design_.rows(); }
  Index p() const noexcept { return design_.cols(); }

 private:
  SparseRowMatrix design_;
  Vector targets_;
  Task task_;
};

// Least squares: f(w) = (1/2n) ||Xw - y||^2.
double ls_value(const Vector& w, const Dataset& d);
Vector ls_gradient(const Vector& w, const Dataset& d);
// lambda_max(X^T X) / n by power iteration (relative tolerance 1e-8, at most
// 500 steps); falls back to trace(X^T X) / n when the iteration stalls.
double ls_lipschitz(const Dataset& d);

// Logistic: f(w) = (1/n) sum_i log(1 + exp(-y_i x_i^T w)), evaluated stably.
double logistic_value(const Vector& w, const Dataset& d);
Vector logistic_gradient(const Vector& w, const Dataset& d);
// (1/4n) sum_i x_i^T x_i.
double logistic_lipschitz(const Dataset& d);

enum class LossKind { LeastSquares, Logistic };

// Gradient Lipschitz constant of each per-sample term f_i, so that the
// 1/n-weighted sum bounds the Lipschitz constant of f.
Vector per_sample_lipschitz(LossKind kind, const Dataset& d);

// Smallest eigenvalue of X^T X / n by inverse power iteration, i.e. the
// strong-convexity modulus of least squares. Returns 0 when X^T X is singular.
double ls_strong_convexity(const Dataset& d);

// Value / gradient / Lipschitz-bound triple for a smooth loss f. Cheap to copy;
// the dataset is shared.
class SmoothLoss {
 public:
  SmoothLoss(LossKind kind, std::shared_ptr<const Dataset> data);

  LossKind kind() const noexcept { return kind_; }
  const Dataset& data() const noexcept { return *data_; }
  const std::shared_ptr<const Dataset>& data_ptr() const noexcept { return data_; }
  Index dim() const noexcept { return data_->p(); }
  double lipschitz() const noexcept { return lipschitz_; }

  double value(const Vector& w) const;
  Vector gradient(const Vector& w) const;
  // Shares the X w product between value and gradient.
  double value_and_gradient(const Vector& w, Vector& grad) const;

 private:
  LossKind kind_;
  std::shared_ptr<const Dataset> data_;
  double lipschitz_;
};

}  // namespace nmm
