#include "nmm/cccp.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace nmm {

namespace {

double soft(double x, double t) {
  const double m = std::abs(x) - t;
  return m > 0.0 ? std::copysign(m, x) : 0.0;
}

}  // namespace

DcDecomposition DcDecomposition::from_penalty(const PenaltySpec& spec) {
  if (!spec.smooth()) {
    throw UnsupportedError(spec.name() + " has no C^1 concave part; CCCP needs LOG, SCAD or MCP");
  }
  return DcDecomposition(penalty_derivative(0.0, spec), curvature_lipschitz(spec), spec);
}

DcDecomposition DcDecomposition::convex_l1(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("l1 weight kappa must be >= 0");
  }
  return DcDecomposition(kappa, 0.0, std::nullopt);
}

DcDecomposition dc_decompose(const PenaltySpec& spec) { return DcDecomposition::from_penalty(spec); }

double DcDecomposition::h(double t) const {
  if (!penalty_) return 0.0;
  const PenaltySpec& s = *penalty_;
  const double a = std::abs(t);
  const double lam = s.lambda();
  const double sh = s.shape();
  switch (s.kind()) {
    case PenaltyKind::Mcp:
      return a < lam * sh ? a * a / (2.0 * sh) : lam * a - lam * lam * sh / 2.0;
    case PenaltyKind::Scad:
      if (a <= lam) return 0.0;
      if (a <= sh * lam) return (a - lam) * (a - lam) / (2.0 * (sh - 1.0));
      return lam * a - (sh + 1.0) * lam * lam / 2.0;
    case PenaltyKind::Log:
      if (s.log_form() == LogForm::Normalized) {
        return lam / std::log1p(sh) * (sh * a - std::log1p(sh * a));
      }
      return lam * (a / sh - std::log1p(a / sh));
    case PenaltyKind::CappedL1:
      break;
  }
  throw UnsupportedError("capped-l1 has no smooth DC decomposition");
}

double DcDecomposition::h_prime(double t) const {
  if (!penalty_ || t == 0.0) return 0.0;
  const double a = std::abs(t);
  return std::copysign(kappa_ - penalty_derivative(a, *penalty_), t);
}

DcProblem::DcProblem(SmoothLoss loss, DcDecomposition concave, double ridge,
                     std::optional<Box> box, std::optional<double> gamma_u)
    : loss_(std::move(loss)), concave_(std::move(concave)), ridge_(ridge), box_(std::move(box)) {
  if (!(ridge_ >= 0.0) || !std::isfinite(ridge_)) throw std::invalid_argument("ridge must be >= 0");
  if (box_) {
    if (box_->lo.size() != dim() || box_->hi.size() != dim()) {
      throw DimensionError("box bounds must have length p");
    }
    for (Index i = 0; i < dim(); ++i) {
      if (!(box_->lo[i] <= box_->hi[i])) throw std::invalid_argument("box needs lo <= hi");
    }
  }
  if (gamma_u) {
    gamma_u_ = *gamma_u;
  } else {
    const double base =
        loss_.kind() == LossKind::LeastSquares ? ls_strong_convexity(loss_.data()) : 0.0;
    gamma_u_ = base + ridge_;
  }
  if (!(gamma_u_ > 0.0)) {
    throw std::invalid_argument(
        "u is not strongly convex (gamma_u = 0); use full-column-rank least squares or add a ridge");
  }
}

bool DcProblem::feasible(const Vector& w) const {
  if (!box_) return true;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] < box_->lo[i] || w[i] > box_->hi[i]) return false;
  }
  return true;
}

Vector DcProblem::project(const Vector& w) const {
  if (!box_) return w;
  return w.cwiseMax(box_->lo).cwiseMin(box_->hi);
}

double DcProblem::u(const Vector& w) const {
  return loss_.value(w) + 0.5 * ridge_ * w.squaredNorm() + concave_.kappa() * w.lpNorm<1>();
}

double DcProblem::v(const Vector& w) const {
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) s += concave_.h(w[i]);
  return s;
}

Vector DcProblem::grad_v(const Vector& w) const {
  Vector g(w.size());
  for (Index i = 0; i < w.size(); ++i) g[i] = concave_.h_prime(w[i]);
  return g;
}

double DcProblem::objective(const Vector& w) const {
  if (!feasible(w)) return std::numeric_limits<double>::infinity();
  return u(w) - v(w);
}

namespace {

// Distance from 0 to grad + kappa d|.|(v) + N_box(v), Euclidean norm.
double subproblem_residual(const Vector& v, const Vector& grad, double kappa,
                           const std::optional<Box>& box) {
  const double inf = std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    double lo = v[i] == 0.0 ? -kappa : std::copysign(kappa, v[i]);
    double hi = v[i] == 0.0 ? kappa : lo;
    if (box) {
      if (v[i] == box->lo[i]) lo = -inf;
      if (v[i] == box->hi[i]) hi = inf;
    }
    const double x = -grad[i];
    const double d = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

CccpStep cccp_step(const Vector& w, const DcProblem& prob, const CccpConfig& cfg) {
  if (w.size() != prob.dim()) throw DimensionError("cccp_step: iterate length mismatch");
  if (!(cfg.inner_tol > 0.0) || cfg.inner_max_iter < 1) {
    throw std::invalid_argument("inner tolerance and iteration cap must be positive");
  }
  const double step = 1.0 / (prob.loss().lipschitz() + prob.ridge());
  const double kappa = prob.l1_weight();
  const Vector linear = prob.grad_v(w);

  CccpStep out;
  Vector v = prob.project(w);
  Vector grad;
  double best_res = std::numeric_limits<double>::infinity();
  for (long it = 0;; ++it) {
    prob.loss().value_and_gradient(v, grad);
    grad += prob.ridge() * v - linear;
    const double res = subproblem_residual(v, grad, kappa, prob.box());
    if (res < best_res) {
      best_res = res;
      out.w = v;
      out.inner_residual = res;
    }
    out.inner_iterations = it;
    if (res <= cfg.inner_tol) break;
    if (it >= cfg.inner_max_iter) {
      out.exact = false;
      break;
    }
    for (Index i = 0; i < v.size(); ++i) v[i] = soft(v[i] - step * grad[i], step * kappa);
    v = prob.project(v);
  }
  return out;
}

IterateTrace run_cccp(const DcProblem& prob, const CccpConfig& cfg) {
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) {
    throw std::invalid_argument("outer iteration cap and tolerance must be positive");
  }
  IterateTrace trace;
  trace.method = "cccp";
  trace.lipschitz = prob.loss().lipschitz();
  trace.inner_tol = cfg.inner_tol;

  Vector w = cfg.initial ? *cfg.initial : prob.project(Vector::Zero(prob.dim()));
  if (w.size() != prob.dim()) throw DimensionError("initial point length mismatch");
  if (!prob.feasible(w)) throw std::invalid_argument("initial point lies outside the box");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  double obj = prob.objective(w);
  if (!std::isfinite(obj)) throw NumericalError("non-finite objective at the initial point");
  trace.records.push_back({0, obj, 0.0, 0.0, elapsed()});
  trace.iterates.push_back(w);

  Vector gv = prob.grad_v(w);
  double res = 0.0;
  long k = 0;
  while (k < cfg.max_iter) {
    CccpStep st = cccp_step(w, prob, cfg);
    if (!st.exact) ++trace.inexact_steps;
    const Vector delta = st.w - w;
    const double step_inf = delta.lpNorm<Eigen::Infinity>();
    w = std::move(st.w);
    ++k;
    obj = prob.objective(w);
    if (!std::isfinite(obj)) {
      throw NumericalError("objective became non-finite at outer iteration " + std::to_string(k));
    }
    Vector gv_next = prob.grad_v(w);
    res = (gv - gv_next).norm();
    gv = std::move(gv_next);
    trace.records.push_back({k, obj, delta.norm(), res, elapsed()});
    trace.iterates.push_back(w);
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

CccpDescentReport cccp_descent_check(const IterateTrace& trace, double gamma_u) {
  CccpDescentReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const IterateRecord& prev = trace.records[k - 1];
    const IterateRecord& cur = trace.records[k];
    const double d = cur.step_norm;
    const double margin =
        prev.objective - cur.objective - 0.5 * gamma_u * d * d + 2.0 * trace.inner_tol * d;
    // Objective values carry O(eps |F|) rounding of their own.
    if (margin < -1e-12 * (1.0 + std::abs(prev.objective))) rep.ok = false;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_iter = cur.iter;
    }
  }
  if (trace.records.size() < 2) rep.worst_margin = 0.0;
  return rep;
}

}  // namespace nmm
