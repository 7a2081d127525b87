#pragma once

#include <span>

#include "nmm/mm_solver.hpp"

namespace nmm {

// Subgradient certificate for one MM step (w -> w_next).
//   scheme A: A = grad f(w_next) - grad Q_f(w_next | w)
//   scheme B: B = A - b, b_i = sgn(w_next_i) (zeta'(|w_i|) - zeta'(|w_next_i|))
// At w_next_i = 0 the free sign c in [-1, 1] is chosen to minimize |B_i|.
// Either certificate is an element of dF(w_next).
struct ResidualReport {
  Vector b_vector;     // zero for scheme A
  Vector certificate;  // A or B
  double B_norm = 0.0;
  double step_norm = 0.0;
  double bound = 0.0;  // (L_Qf + L_f [+ L_zeta]) * ||w_next - w||, L_Qf = mu
  double kkt = 0.0;    // dist(0, dF(w_next))
};

ResidualReport subgradient_residual(const Vector& w_next, const Vector& w,
                                    const ProblemInstance& prob, double mu, Scheme scheme);

// dist(0, dF(w)), the Euclidean norm of the componentwise distances from
// -grad_i f(w) to the subdifferential interval of zeta(|.|) at w_i.
double kkt_residual(const Vector& w, const ProblemInstance& prob);
double kkt_residual(const Vector& w, const Vector& grad, const PenaltySpec& spec);

struct FiniteLength {
  double total = 0.0;               // sum_k ||Delta_k||
  double tail_after_halfway = 0.0;  // same sum over the second half of the steps
};

FiniteLength finite_length(const IterateTrace& trace);

enum class Regime { Finite, Linear, Sublinear, Undetermined };

const char* regime_name(Regime r) noexcept;

struct RateFit {
  Regime regime = Regime::Undetermined;
  // Linear: per-iteration ratio rho. Sublinear: exponent in C k^(-exponent).
  // Finite: first iteration at which the error is exactly zero.
  double rate_constant = 0.0;
  double fit_quality = 0.0;  // R^2 of the selected model
  double linear_r2 = 0.0;
  double sublinear_r2 = 0.0;
};

struct RateFitOptions {
  std::size_t min_points = 20;
  std::size_t discard_last = 5;
  double min_quality = 0.8;
};

// Classifies e_k = ||w^(k) - w*|| with w* the final iterate. Uses the last
// half of the iterations, minus the final `discard_last`.
RateFit rate_fit(const IterateTrace& trace, const RateFitOptions& opts = {});
// Same classification for an explicit error sequence e_0, e_1, ...
RateFit rate_fit_errors(std::span<const double> errors, const RateFitOptions& opts = {});

struct DescentReport {
  bool ok = true;
  double worst_margin = 0.0;  // min_k F_k - F_{k+1} - (modulus/2)||Delta_k||^2
  long worst_iter = -1;
  double modulus = 0.0;
};

// Sufficient descent F(w^k) - F(w^(k+1)) >= (modulus/2) ||Delta_k||^2 - slack.
// A negative modulus (mu below L_f) is reported as a failure: the surrogate
// no longer majorizes.
DescentReport check_descent(const IterateTrace& trace, double modulus, double slack = 1e-9);

struct BoundReport {
  bool ok = true;
  double worst_bound_margin = 0.0;       // min_k bound - B_norm
  double worst_membership_margin = 0.0;  // min_k B_norm - kkt(w_next)
  long steps = 0;
};

// Checks B_norm <= bound + slack and kkt(w_next) <= B_norm + slack on every
// consecutive pair of recorded iterates.
BoundReport check_subgradient_bounds(const IterateTrace& trace, const ProblemInstance& prob,
                                     Scheme scheme, double slack = 1e-8);

// sum_k ||Delta_k||^2 versus (2 / modulus) (F_0 - F_final): returns the slack
// right side minus left side (>= 0 when the bound holds).
double square_summability_gap(const IterateTrace& trace, double modulus);

}  // namespace nmm
