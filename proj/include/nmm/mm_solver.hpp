#pragma once

#include <optional>

#include "nmm/losses.hpp"
#include "nmm/penalties.hpp"
#include "nmm/trace.hpp"

namespace nmm {

// F(w) = f(w) + r(w).
struct ProblemInstance {
  SmoothLoss loss;
  PenaltySpec penalty;

  Index dim() const noexcept { return loss.dim(); }
  double objective(const Vector& w) const { return loss.value(w) + reg_value(w, penalty); }
};

enum class Scheme {
  A,  // exact penalty prox after the quadratic loss surrogate
  B,  // linearized penalty: weighted soft-thresholding
};

const char* scheme_name(Scheme s) noexcept;

struct MmConfig {
  Scheme scheme = Scheme::B;
  double rho = 1.01;               // mu = rho * L_f
  std::optional<double> mu_override;
  long max_iter = 5000;
  double tol = 1e-8;               // on ||w^(k+1) - w^(k)||_inf
  bool record_trace = true;
  std::optional<Vector> initial;   // defaults to the zero vector
  // Permit mu < L_f. Only useful for deliberately broken runs in diagnostics.
  bool allow_non_majorizing = false;
};

// Surrogate curvature implied by the config; validates rho / mu against L_f.
double effective_mu(const ProblemInstance& prob, const MmConfig& cfg);

// Q_f(w | anchor) = f(a) + <grad f(a), w - a> + (mu/2) ||w - a||^2.
double quad_surrogate_value(const Vector& w, const Vector& anchor, double mu,
                            const SmoothLoss& loss);

// Q_r(w | anchor) = sum_i zeta(|a_i|) + zeta'(|a_i|) (|w_i| - |a_i|).
double linearized_penalty_value(const Vector& w, const Vector& anchor, const PenaltySpec& spec);

// argmin_v Q_f(v | w) + r(v), coordinatewise prox of z = w - grad f(w) / mu.
Vector step_a(const Vector& w, const ProblemInstance& prob, double mu);
Vector step_a(const Vector& w, const Vector& grad, const ProblemInstance& prob, double mu);

// argmin_v Q_f(v | w) + Q_r(v | w): soft-threshold z with weights zeta'(|w_i|) / mu.
Vector step_b(const Vector& w, const ProblemInstance& prob, double mu);
Vector step_b(const Vector& w, const Vector& grad, const ProblemInstance& prob, double mu);

// lambda / (|w_i| + epsilon): zeta' of the epsilon-form LOG penalty, so step_b
// with that penalty is iteratively reweighted l1.
Vector reweighted_l1_weights(const Vector& w, double epsilon, double lambda);

IterateTrace run_mm(const ProblemInstance& prob, const MmConfig& cfg);

}  // namespace nmm
