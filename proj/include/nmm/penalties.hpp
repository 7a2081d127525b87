#pragma once

#include <string>

#include "nmm/common.hpp"

namespace nmm {

enum class PenaltyKind { Log, Scad, Mcp, CappedL1 };

// The LOG penalty comes in two parameterizations:
//   Normalized: lambda / log(theta + 1) * log(1 + theta t)
//   Epsilon:    lambda * log(1 + t / epsilon)
// The plain form lambda * log(1 + alpha t) is the Epsilon form with
// epsilon = 1 / alpha.
enum class LogForm { Normalized, Epsilon };

// Separable penalty zeta applied to |w_i|. `shape` is theta for LOG
// (normalized), SCAD and capped-l1, gamma for MCP, and epsilon for the
// epsilon-form LOG.
class PenaltySpec {
 public:
  static PenaltySpec log_normalized(double lambda, double theta);
  static PenaltySpec log_epsilon(double lambda, double epsilon);
  static PenaltySpec scad(double lambda, double theta);
  static PenaltySpec mcp(double lambda, double gamma);
  static PenaltySpec capped_l1(double lambda, double theta);

  PenaltyKind kind() const noexcept { return kind_; }
  LogForm log_form() const noexcept { return log_form_; }
  double lambda() const noexcept { return lambda_; }
  double shape() const noexcept { return shape_; }
  // zeta' exists on all of [0, inf) and is Lipschitz.
  bool smooth() const noexcept { return kind_ != PenaltyKind::CappedL1; }

  std::string name() const;

 private:
  PenaltySpec(PenaltyKind kind, LogForm form, double lambda, double shape);

  PenaltyKind kind_;
  LogForm log_form_;
  double lambda_;
  double shape_;
};

// Subdifferential of t -> zeta(|t|) at a point, as a closed interval.
struct ScalarSubgradientInterval {
  double lo;
  double hi;

  // Distance from x to [lo, hi].
  double distance(double x) const noexcept {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
  }
};

double penalty_value(double t, const PenaltySpec& spec);
// zeta'(t). Throws UnsupportedError for capped-l1 at t = theta.
double penalty_derivative(double t, const PenaltySpec& spec);
// Lipschitz constant of zeta' on [0, inf). Throws for capped-l1.
double curvature_lipschitz(const PenaltySpec& spec);

// For w = 0 this is [-zeta'(0), zeta'(0)]; for capped-l1 at |w| = theta the
// convex hull of the one-sided derivatives is returned.
ScalarSubgradientInterval subgradient_interval(double w, const PenaltySpec& spec);

// A global minimizer of (1/(2 alpha)) (w - u)^2 + zeta(|w|). Ties go to the
// smallest |w|.
double scalar_prox(double u, double alpha, const PenaltySpec& spec);

// r(w) = sum_i zeta(|w_i|).
double reg_value(const Vector& w, const PenaltySpec& spec);

}  // namespace nmm
