#include "nmm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nmm {

namespace {

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  if (syy > 0.0) fit.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

// `exact_upto` bounds the indices considered for finite termination; for a
// trace the last error is zero by construction and is excluded.
RateFit classify(std::span<const double> errors, std::size_t exact_upto,
                 const RateFitOptions& opts) {
  RateFit out;
  const std::size_t n = errors.size();
  if (n < opts.min_points) return out;

  for (std::size_t k = 0; k < exact_upto; ++k) {
    if (errors[k] == 0.0) {
      out.regime = Regime::Finite;
      out.rate_constant = static_cast<double>(k);
      out.fit_quality = 1.0;
      return out;
    }
  }

  const std::size_t begin = n / 2;
  const std::size_t end = n > opts.discard_last ? n - opts.discard_last : 0;
  if (end < begin + 3) return out;

  std::vector<double> k_lin, k_log, y;
  for (std::size_t k = begin; k < end; ++k) {
    if (!(errors[k] > 0.0)) continue;
    const double kk = static_cast<double>(std::max<std::size_t>(k, 1));
    k_lin.push_back(kk);
    k_log.push_back(std::log(kk));
    y.push_back(std::log(errors[k]));
  }
  if (y.size() < 3) return out;

  const LineFit lin = least_squares_line(k_lin, y);
  const LineFit sub = least_squares_line(k_log, y);
  out.linear_r2 = lin.r2;
  out.sublinear_r2 = sub.r2;

  if (lin.r2 >= sub.r2) {
    out.fit_quality = lin.r2;
    out.rate_constant = std::exp(lin.slope);
    if (lin.r2 >= opts.min_quality && out.rate_constant > 0.0 && out.rate_constant < 1.0) {
      out.regime = Regime::Linear;
    }
  } else {
    out.fit_quality = sub.r2;
    out.rate_constant = -sub.slope;
    if (sub.r2 >= opts.min_quality && out.rate_constant > 0.0) out.regime = Regime::Sublinear;
  }
  return out;
}

void require_iterates(const IterateTrace& trace, const char* who) {
  if (trace.iterates.empty()) {
    throw std::invalid_argument(std::string(who) + " needs a trace recorded with iterates");
  }
}

}  // namespace

ResidualReport subgradient_residual(const Vector& w_next, const Vector& w,
                                    const ProblemInstance& prob, double mu, Scheme scheme) {
  if (w_next.size() != prob.dim() || w.size() != prob.dim()) {
    throw DimensionError("subgradient_residual: iterate length does not match the problem");
  }
  const PenaltySpec& spec = prob.penalty;
  if (scheme == Scheme::B && !spec.smooth()) {
    throw UnsupportedError("scheme B certificate needs a differentiable penalty");
  }

  const Vector grad_next = prob.loss.gradient(w_next);
  const Vector grad = prob.loss.gradient(w);
  const Vector delta = w_next - w;
  // grad Q_f(v | w) = grad f(w) + mu (v - w)
  const Vector a = grad_next - grad - mu * delta;

  ResidualReport rep;
  rep.step_norm = delta.norm();
  rep.b_vector = Vector::Zero(w.size());
  double lipschitz_sum = mu + prob.loss.lipschitz();

  if (scheme == Scheme::B) {
    lipschitz_sum += curvature_lipschitz(spec);
    for (Index i = 0; i < w.size(); ++i) {
      const double dw = penalty_derivative(std::abs(w[i]), spec);
      if (w_next[i] != 0.0) {
        rep.b_vector[i] = std::copysign(1.0, w_next[i]) * (dw - penalty_derivative(std::abs(w_next[i]), spec));
      } else {
        const double d = dw - penalty_derivative(0.0, spec);
        const double c = d == 0.0 ? 0.0 : std::clamp(a[i] / d, -1.0, 1.0);
        rep.b_vector[i] = c * d;
      }
    }
  }

  rep.certificate = a - rep.b_vector;
  rep.B_norm = rep.certificate.norm();
  rep.bound = lipschitz_sum * rep.step_norm;
  rep.kkt = kkt_residual(w_next, grad_next, spec);
  return rep;
}

double kkt_residual(const Vector& w, const Vector& grad, const PenaltySpec& spec) {
  if (w.size() != grad.size()) throw DimensionError("kkt_residual: gradient length mismatch");
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    const double d = subgradient_interval(w[i], spec).distance(-grad[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double kkt_residual(const Vector& w, const ProblemInstance& prob) {
  return kkt_residual(w, prob.loss.gradient(w), prob.penalty);
}

FiniteLength finite_length(const IterateTrace& trace) {
  FiniteLength out;
  if (trace.records.size() < 2) return out;
  const std::size_t steps = trace.records.size() - 1;
  const std::size_t half = (steps + 1) / 2;
  for (std::size_t j = 0; j < steps; ++j) {
    const double s = trace.records[j + 1].step_norm;
    out.total += s;
    if (j >= half) out.tail_after_halfway += s;
  }
  return out;
}

const char* regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::Finite:
      return "Finite";
    case Regime::Linear:
      return "Linear";
    case Regime::Sublinear:
      return "Sublinear";
    case Regime::Undetermined:
      return "Undetermined";
  }
  return "Undetermined";
}

RateFit rate_fit(const IterateTrace& trace, const RateFitOptions& opts) {
  require_iterates(trace, "rate_fit");
  const Vector& w_star = trace.iterates.back();
  std::vector<double> errors;
  errors.reserve(trace.iterates.size());
  for (const Vector& w : trace.iterates) errors.push_back((w - w_star).norm());
  return classify(errors, errors.size() - 1, opts);
}

RateFit rate_fit_errors(std::span<const double> errors, const RateFitOptions& opts) {
  return classify(errors, errors.size(), opts);
}

DescentReport check_descent(const IterateTrace& trace, double modulus, double slack) {
  DescentReport rep;
  rep.modulus = modulus;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const IterateRecord& prev = trace.records[k - 1];
    const IterateRecord& cur = trace.records[k];
    const double margin =
        prev.objective - cur.objective - 0.5 * modulus * cur.step_norm * cur.step_norm;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_iter = cur.iter;
    }
  }
  if (trace.records.size() < 2) rep.worst_margin = 0.0;
  rep.ok = modulus >= 0.0 && rep.worst_margin >= -slack;
  return rep;
}

BoundReport check_subgradient_bounds(const IterateTrace& trace, const ProblemInstance& prob,
                                     Scheme scheme, double slack) {
  require_iterates(trace, "check_subgradient_bounds");
  BoundReport rep;
  rep.worst_bound_margin = std::numeric_limits<double>::infinity();
  rep.worst_membership_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < trace.iterates.size(); ++k) {
    const ResidualReport r =
        subgradient_residual(trace.iterates[k], trace.iterates[k - 1], prob, trace.mu, scheme);
    rep.worst_bound_margin = std::min(rep.worst_bound_margin, r.bound - r.B_norm);
    rep.worst_membership_margin = std::min(rep.worst_membership_margin, r.B_norm - r.kkt);
    ++rep.steps;
  }
  if (rep.steps == 0) {
    rep.worst_bound_margin = 0.0;
    rep.worst_membership_margin = 0.0;
  }
  rep.ok = rep.worst_bound_margin >= -slack && rep.worst_membership_margin >= -slack;
  return rep;
}

double square_summability_gap(const IterateTrace& trace, double modulus) {
  if (trace.records.empty()) return 0.0;
  double lhs = 0.0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    lhs += trace.records[k].step_norm * trace.records[k].step_norm;
  }
  const double drop = trace.records.front().objective - trace.records.back().objective;
  return 2.0 / modulus * drop - lhs;
}

}  // namespace nmm
