#include "nmm/mm_solver.hpp"

#include <chrono>
#include <cmath>

#include "nmm/diagnostics.hpp"

namespace nmm {

namespace {

void check_dim(const Vector& v, Index p, const char* what) {
  if (v.size() != p) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(p));
  }
}

void require_smooth(const PenaltySpec& spec) {
  if (!spec.smooth()) {
    throw UnsupportedError(spec.name() +
                           " has no Lipschitz derivative; use scheme A (exact prox)");
  }
}

}  // namespace

const char* scheme_name(Scheme s) noexcept { return s == Scheme::A ? "a" : "b"; }

double effective_mu(const ProblemInstance& prob, const MmConfig& cfg) {
  const double lf = prob.loss.lipschitz();
  double mu = 0.0;
  if (cfg.mu_override) {
    mu = *cfg.mu_override;
    if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be > 0");
  } else {
    if (!(cfg.rho > 0.0) || !std::isfinite(cfg.rho)) throw std::invalid_argument("rho must be > 0");
    mu = cfg.rho * lf;
  }
  if (mu < lf && !cfg.allow_non_majorizing) {
    throw std::invalid_argument("mu = " + std::to_string(mu) + " is below L_f = " +
                                std::to_string(lf) + "; the quadratic surrogate would not majorize f");
  }
  return mu;
}

double quad_surrogate_value(const Vector& w, const Vector& anchor, double mu,
                            const SmoothLoss& loss) {
  check_dim(w, loss.dim(), "w");
  check_dim(anchor, loss.dim(), "anchor");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  Vector grad;
  const double fa = loss.value_and_gradient(anchor, grad);
  const Vector d = w - anchor;
  return fa + grad.dot(d) + 0.5 * mu * d.squaredNorm();
}

double linearized_penalty_value(const Vector& w, const Vector& anchor, const PenaltySpec& spec) {
  require_smooth(spec);
  if (w.size() != anchor.size()) throw DimensionError("w and anchor lengths differ");
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    const double a = std::abs(anchor[i]);
    s += penalty_value(a, spec) + penalty_derivative(a, spec) * (std::abs(w[i]) - a);
  }
  return s;
}

Vector step_a(const Vector& w, const ProblemInstance& prob, double mu) {
  return step_a(w, prob.loss.gradient(w), prob, mu);
}

Vector step_a(const Vector& w, const Vector& grad, const ProblemInstance& prob, double mu) {
  check_dim(w, prob.dim(), "w");
  check_dim(grad, prob.dim(), "gradient");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  const double alpha = 1.0 / mu;
  Vector out(w.size());
  for (Index i = 0; i < w.size(); ++i) out[i] = scalar_prox(w[i] - grad[i] * alpha, alpha, prob.penalty);
  return out;
}

Vector step_b(const Vector& w, const ProblemInstance& prob, double mu) {
  require_smooth(prob.penalty);
  return step_b(w, prob.loss.gradient(w), prob, mu);
}

Vector step_b(const Vector& w, const Vector& grad, const ProblemInstance& prob, double mu) {
  require_smooth(prob.penalty);
  check_dim(w, prob.dim(), "w");
  check_dim(grad, prob.dim(), "gradient");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  Vector out(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    const double z = w[i] - grad[i] / mu;
    const double thresh = penalty_derivative(std::abs(w[i]), prob.penalty) / mu;
    const double mag = std::abs(z) - thresh;
    out[i] = mag > 0.0 ? std::copysign(mag, z) : 0.0;
  }
  return out;
}

Vector reweighted_l1_weights(const Vector& w, double epsilon, double lambda) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  return (lambda / (w.array().abs() + epsilon)).matrix();
}

IterateTrace run_mm(const ProblemInstance& prob, const MmConfig& cfg) {
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (cfg.scheme == Scheme::B) require_smooth(prob.penalty);

  const double mu = effective_mu(prob, cfg);
  const Index p = prob.dim();

  IterateTrace trace;
  trace.method = cfg.scheme == Scheme::A ? "mm-a" : "mm-b";
  trace.mu = mu;
  trace.lipschitz = prob.loss.lipschitz();
  if (mu <= trace.lipschitz) {
    trace.warnings.push_back("mu <= L_f: the quadratic surrogate is not strictly majorizing");
  }

  Vector w = cfg.initial ? *cfg.initial : Vector::Zero(p);
  check_dim(w, p, "initial point");
  if (!w.allFinite()) throw std::invalid_argument("initial point must be finite");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  Vector grad;
  auto evaluate = [&](long k) {
    const double f = prob.loss.value_and_gradient(w, grad) + reg_value(w, prob.penalty);
    if (!std::isfinite(f)) {
      throw NumericalError("objective became non-finite at iteration " + std::to_string(k) +
                           " (mu below L_f or ill-scaled data)");
    }
    return f;
  };

  double obj = evaluate(0);
  double res = kkt_residual(w, grad, prob.penalty);
  if (cfg.record_trace) {
    trace.records.push_back({0, obj, 0.0, res, elapsed()});
    trace.iterates.push_back(w);
  }

  long k = 0;
  while (k < cfg.max_iter) {
    Vector next = cfg.scheme == Scheme::A ? step_a(w, grad, prob, mu) : step_b(w, grad, prob, mu);
    const Vector delta = next - w;
    const double step_inf = delta.lpNorm<Eigen::Infinity>();
    w = std::move(next);
    ++k;
    obj = evaluate(k);
    res = kkt_residual(w, grad, prob.penalty);
    if (cfg.record_trace) {
      trace.records.push_back({k, obj, delta.norm(), res, elapsed()});
      trace.iterates.push_back(w);
    }
    if (step_inf <= cfg.tol) {
      trace.converged = true;
      break;
    }
  }

  trace.iterations = k;
  trace.final_w = std::move(w);
  trace.final_objective = obj;
  trace.final_residual = res;
  return trace;
}

}  // namespace nmm
