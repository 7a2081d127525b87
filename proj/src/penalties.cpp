#include "nmm/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nmm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_t(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("penalty argument must be >= 0 (pass |w_i|)");
}

// Real roots of a x^2 + b x + c = 0, computed without cancellation.
void quadratic_roots(double a, double b, double c, std::vector<double>& out) {
  if (a == 0.0) {
    if (b != 0.0) out.push_back(-c / b);
    return;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q != 0.0) {
    out.push_back(q / a);
    out.push_back(c / q);
  } else {
    out.push_back(0.0);
  }
}

// Candidate set for the prox on w >= 0 given u >= 0: all of them lie in [0, u].
class Candidates {
 public:
  explicit Candidates(double u) : u_(u) {
    points_.push_back(0.0);
    points_.push_back(u);
  }

  void boundary(double x) {
    if (x >= 0.0 && x <= u_) points_.push_back(x);
  }

  // Stationary point of a piece living on [a, b], projected onto the piece.
  void stationary(double x, double a, double b) {
    const double lo = std::max(a, 0.0);
    const double hi = std::min(b, u_);
    if (!(lo <= hi) || !std::isfinite(x)) return;
    points_.push_back(std::clamp(x, lo, hi));
  }

  std::vector<double>& points() { return points_; }

 private:
  double u_;
  std::vector<double> points_;
};

}  // namespace

PenaltySpec::PenaltySpec(PenaltyKind kind, LogForm form, double lambda, double shape)
    : kind_(kind), log_form_(form), lambda_(lambda), shape_(shape) {
  require(std::isfinite(lambda) && lambda > 0.0, "penalty lambda must be > 0");
  require(std::isfinite(shape), "penalty shape parameter must be finite");
  switch (kind) {
    case PenaltyKind::Scad:
      require(shape > 2.0, "SCAD requires theta > 2");
      break;
    case PenaltyKind::Mcp:
      require(shape > 0.0, "MCP requires gamma > 0");
      break;
    case PenaltyKind::Log:
      require(shape > 0.0, form == LogForm::Normalized ? "LOG requires theta > 0"
                                                       : "LOG requires epsilon > 0");
      break;
    case PenaltyKind::CappedL1:
      require(shape > 0.0, "capped-l1 requires theta > 0");
      break;
  }
}

PenaltySpec PenaltySpec::log_normalized(double lambda, double theta) {
  return {PenaltyKind::Log, LogForm::Normalized, lambda, theta};
}
PenaltySpec PenaltySpec::log_epsilon(double lambda, double epsilon) {
  return {PenaltyKind::Log, LogForm::Epsilon, lambda, epsilon};
}
PenaltySpec PenaltySpec::scad(double lambda, double theta) {
  return {PenaltyKind::Scad, LogForm::Normalized, lambda, theta};
}
PenaltySpec PenaltySpec::mcp(double lambda, double gamma) {
  return {PenaltyKind::Mcp, LogForm::Normalized, lambda, gamma};
}
PenaltySpec PenaltySpec::capped_l1(double lambda, double theta) {
  return {PenaltyKind::CappedL1, LogForm::Normalized, lambda, theta};
}

std::string PenaltySpec::name() const {
  switch (kind_) {
    case PenaltyKind::Log:
      return log_form_ == LogForm::Normalized ? "log" : "log-eps";
    case PenaltyKind::Scad:
      return "scad";
    case PenaltyKind::Mcp:
      return "mcp";
    case PenaltyKind::CappedL1:
      return "capped-l1";
  }
  return "unknown";
}

double penalty_value(double t, const PenaltySpec& spec) {
  check_t(t);
  const double lam = spec.lambda();
  const double s = spec.shape();
  switch (spec.kind()) {
    case PenaltyKind::Log:
      if (spec.log_form() == LogForm::Normalized) return lam / std::log1p(s) * std::log1p(s * t);
      return lam * std::log1p(t / s);
    case PenaltyKind::Scad:
      if (t <= lam) return lam * t;
      if (t <= s * lam) return -(t * t - 2.0 * s * lam * t + lam * lam) / (2.0 * (s - 1.0));
      return (s + 1.0) * lam * lam / 2.0;
    case PenaltyKind::Mcp:
      if (t < lam * s) return lam * (t - t * t / (2.0 * lam * s));
      return lam * lam * s / 2.0;
    case PenaltyKind::CappedL1:
      return lam * std::min(t, s);
  }
  return 0.0;
}

double penalty_derivative(double t, const PenaltySpec& spec) {
  check_t(t);
  const double lam = spec.lambda();
  const double s = spec.shape();
  switch (spec.kind()) {
    case PenaltyKind::Log:
      if (spec.log_form() == LogForm::Normalized) return lam * s / (std::log1p(s) * (1.0 + s * t));
      return lam / (t + s);
    case PenaltyKind::Scad:
      if (t <= lam) return lam;
      if (t <= s * lam) return (s * lam - t) / (s - 1.0);
      return 0.0;
    case PenaltyKind::Mcp:
      return t < lam * s ? lam - t / s : 0.0;
    case PenaltyKind::CappedL1:
      if (t == s) throw UnsupportedError("capped-l1 is not differentiable at t = theta");
      return t < s ? lam : 0.0;
  }
  return 0.0;
}

double curvature_lipschitz(const PenaltySpec& spec) {
  const double lam = spec.lambda();
  const double s = spec.shape();
  switch (spec.kind()) {
    case PenaltyKind::Log:
      if (spec.log_form() == LogForm::Normalized) return lam * s * s / std::log1p(s);
      return lam / (s * s);
    case PenaltyKind::Scad:
      return 1.0 / (s - 1.0);
    case PenaltyKind::Mcp:
      return 1.0 / s;
    case PenaltyKind::CappedL1:
      break;
  }
  throw UnsupportedError("capped-l1 derivative jumps at theta; no Lipschitz constant");
}

ScalarSubgradientInterval subgradient_interval(double w, const PenaltySpec& spec) {
  if (w == 0.0) {
    const double d0 = penalty_derivative(0.0, spec);
    return {-d0, d0};
  }
  const double t = std::abs(w);
  if (spec.kind() == PenaltyKind::CappedL1 && t == spec.shape()) {
    return w > 0.0 ? ScalarSubgradientInterval{0.0, spec.lambda()}
                   : ScalarSubgradientInterval{-spec.lambda(), 0.0};
  }
  const double g = std::copysign(penalty_derivative(t, spec), w);
  return {g, g};
}

double scalar_prox(double u, double alpha, const PenaltySpec& spec) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("prox step alpha must be > 0");
  }
  if (!std::isfinite(u)) throw std::invalid_argument("prox input must be finite");
  if (u == 0.0) return 0.0;

  // The minimizer shares the sign of u and lies in [0, |u|].
  const double a = std::abs(u);
  const double lam = spec.lambda();
  const double s = spec.shape();
  Candidates cand(a);
  std::vector<double> roots;

  switch (spec.kind()) {
    case PenaltyKind::Log: {
      // (w - a)/alpha + zeta'(w) = 0 with zeta' = c / (1 + k w) is a quadratic in w.
      if (spec.log_form() == LogForm::Normalized) {
        const double c0 = lam / std::log1p(s);
        quadratic_roots(s, 1.0 - s * a, alpha * c0 * s - a, roots);
      } else {
        quadratic_roots(1.0, s - a, alpha * lam - a * s, roots);
      }
      const double inf = std::numeric_limits<double>::infinity();
      for (double r : roots) cand.stationary(r, 0.0, inf);
      break;
    }
    case PenaltyKind::Scad: {
      cand.stationary(a - alpha * lam, 0.0, lam);
      const double coef = 1.0 / alpha - 1.0 / (s - 1.0);
      if (coef != 0.0) cand.stationary((a / alpha - s * lam / (s - 1.0)) / coef, lam, s * lam);
      cand.boundary(lam);
      cand.boundary(s * lam);
      break;
    }
    case PenaltyKind::Mcp: {
      const double coef = 1.0 / alpha - 1.0 / s;
      if (coef != 0.0) cand.stationary((a / alpha - lam) / coef, 0.0, lam * s);
      cand.boundary(lam * s);
      break;
    }
    case PenaltyKind::CappedL1:
      cand.stationary(a - alpha * lam, 0.0, s);
      cand.boundary(s);
      break;
  }

  auto& pts = cand.points();
  std::sort(pts.begin(), pts.end());
  double best = pts.front();
  double best_obj = std::numeric_limits<double>::infinity();
  for (double w : pts) {
    const double obj = (w - a) * (w - a) / (2.0 * alpha) + penalty_value(w, spec);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best == 0.0 ? 0.0 : std::copysign(best, u);
}

double reg_value(const Vector& w, const PenaltySpec& spec) {
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) s += penalty_value(std::abs(w[i]), spec);
  return s;
}

}  // namespace nmm
