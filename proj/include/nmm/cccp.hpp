#pragma once

#include <optional>

#include "nmm/losses.hpp"
#include "nmm/penalties.hpp"
#include "nmm/trace.hpp"

namespace nmm {

// zeta(|t|) = kappa |t| - h(t) with kappa = zeta'(0) and h convex, h(0) = 0,
// h'(0) = 0. h' is Lipschitz with constant `lipschitz` (= L_zeta).
class DcDecomposition {
 public:
  static DcDecomposition from_penalty(const PenaltySpec& spec);
  // kappa |t| with h = 0: the convex lasso case.
  static DcDecomposition convex_l1(double kappa);

  double kappa() const noexcept { return kappa_; }
  double lipschitz() const noexcept { return lipschitz_; }
  const std::optional<PenaltySpec>& penalty() const noexcept { return penalty_; }

  double h(double t) const;
  double h_prime(double t) const;

 private:
  DcDecomposition(double kappa, double lipschitz, std::optional<PenaltySpec> spec)
      : kappa_(kappa), lipschitz_(lipschitz), penalty_(std::move(spec)) {}

  double kappa_;
  double lipschitz_;
  std::optional<PenaltySpec> penalty_;
};

// Rejects capped-l1: its h' jumps.
DcDecomposition dc_decompose(const PenaltySpec& spec);

struct Box {
  Vector lo;
  Vector hi;
};

// F = delta_C + u - v with
//   u(w) = f(w) + (ridge/2) ||w||^2 + kappa ||w||_1
//   v(w) = sum_i h(w_i)
// and C a box (or all of R^p).
class DcProblem {
 public:
  // gamma_u defaults to lambda_min(X^T X)/n + ridge for least squares and to
  // `ridge` otherwise; construction fails when it is not positive.
  DcProblem(SmoothLoss loss, DcDecomposition concave, double ridge = 0.0,
            std::optional<Box> box = std::nullopt, std::optional<double> gamma_u = std::nullopt);

  const SmoothLoss& loss() const noexcept { return loss_; }
  const DcDecomposition& concave() const noexcept { return concave_; }
  double ridge() const noexcept { return ridge_; }
  double l1_weight() const noexcept { return concave_.kappa(); }
  const std::optional<Box>& box() const noexcept { return box_; }
  double gamma_u() const noexcept { return gamma_u_; }
  Index dim() const noexcept { return loss_.dim(); }

  bool feasible(const Vector& w) const;
  Vector project(const Vector& w) const;

  double u(const Vector& w) const;
  double v(const Vector& w) const;
  Vector grad_v(const Vector& w) const;
  // delta_C + u - v; +inf outside the box.
  double objective(const Vector& w) const;

 private:
  SmoothLoss loss_;
  DcDecomposition concave_;
  double ridge_;
  std::optional<Box> box_;
  double gamma_u_;
};

struct CccpConfig {
  long max_iter = 1000;
  double tol = 1e-8;          // outer step, infinity norm
  double inner_tol = 1e-10;   // Euclidean first-order residual of the subproblem
  long inner_max_iter = 10000;
  std::optional<Vector> initial;  // defaults to 0 projected onto the box
};

struct CccpStep {
  Vector w;
  bool exact = true;  // false when the inner solver hit inner_max_iter
  long inner_iterations = 0;
  double inner_residual = 0.0;
};

// Solves argmin_v delta_C(v) + u(v) - grad v(w)^T v by proximal gradient with
// fixed step 1 / (L_f + ridge).
CccpStep cccp_step(const Vector& w, const DcProblem& prob, const CccpConfig& cfg);

// Records carry F(w^(k)) and ||grad v(w^(k-1)) - grad v(w^(k))||.
IterateTrace run_cccp(const DcProblem& prob, const CccpConfig& cfg);

struct CccpDescentReport {
  bool ok = true;
  double worst_margin = 0.0;
  long worst_iter = -1;
};

// F_k - F_{k+1} >= (gamma/2) ||Delta_k||^2 - 2 inner_tol ||Delta_k||.
CccpDescentReport cccp_descent_check(const IterateTrace& trace, double gamma_u);

}  // namespace nmm
