// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nmm/cccp.hpp"
#include "nmm/cli.hpp"
#include "nmm/data_io.hpp"
#include "nmm/diagnostics.hpp"
#include "nmm/mm_solver.hpp"
#include "oracles.hpp"
#include "problems.hpp"

using namespace nmm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double x) { return format_double(x); }

struct SuiteRun {
  ProblemInstance prob;
  Scheme scheme;
  IterateTrace trace;
};

// Criterion 1 problems; criterion 4 reuses their traces.
std::vector<SuiteRun> descent_suite_runs;

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  long steps = 0;
  for (int i = 0; i < 20; ++i) {
    const LossKind kind = i % 2 == 0 ? LossKind::LeastSquares : LossKind::Logistic;
    const double lam = 0.01 + 0.09 * unif(rng);
    PenaltySpec pen = PenaltySpec::mcp(lam, 1.5 + 4.5 * unif(rng));
    switch ((i / 2) % 3) {
      case 0: pen = PenaltySpec::log_normalized(lam, 1.0 + 9.0 * unif(rng)); break;
      case 1: pen = PenaltySpec::scad(lam, 2.5 + 2.5 * unif(rng)); break;
      default: break;
    }
    const Index n = 50 + static_cast<Index>(unif(rng) * 250.0);
    const Index p = 10 + static_cast<Index>(unif(rng) * 90.0);
    const Index k = std::max<Index>(1, p / 10);
    const auto prob = testprob::synthetic(kind, pen, n, p, k, 0.3, 1000 + static_cast<std::uint64_t>(i));
    for (Scheme s : {Scheme::A, Scheme::B}) {
      MmConfig cfg;
      cfg.scheme = s;
      cfg.rho = 1.01;
      cfg.tol = 1e-9;
      cfg.max_iter = 2000;
      IterateTrace t = run_mm(prob, cfg);
      const auto d = check_descent(t, t.mu - t.lipschitz, 1e-9);
      ok = ok && d.ok;
      if (t.records.size() > 1) worst = std::min(worst, d.worst_margin);
      steps += t.iterations;
      descent_suite_runs.push_back({prob, s, std::move(t)});
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  report(1, ok,
         "20 problems x 2 schemes, " + std::to_string(steps) + " steps, worst descent margin " + fmt(worst) +
             " (slack 1e-9), " + fmt(std::round(secs * 100) / 100) + " s (< 60 s)");
}

void criterion_2() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  const double slack = 1e-10;
  const std::vector<PenaltySpec> pens = {PenaltySpec::log_normalized(0.1, 3.0), PenaltySpec::log_epsilon(0.1, 0.1),
                                         PenaltySpec::scad(0.1, 3.7), PenaltySpec::mcp(0.1, 3.0)};
  bool ok = true;
  double worst_f = std::numeric_limits<double>::infinity(), worst_r = worst_f, anchor_err = 0.0;
  int configs = 0;
  for (LossKind kind : {LossKind::LeastSquares, LossKind::Logistic}) {
    const auto prob = testprob::synthetic(kind, pens[0], 80, 12, 3, 0.3, 5);
    const double mu = 1.01 * prob.loss.lipschitz();
    ++configs;
    for (int s = 0; s < 10000; ++s) {
      Vector w(12), a(12);
      for (Index j = 0; j < 12; ++j) {
        a[j] = unif(rng);
        // Half the samples sit close to the anchor, where the margin is tight.
        w[j] = s % 2 == 0 ? unif(rng) : a[j] + 1e-3 * unif(rng);
      }
      const double gap = quad_surrogate_value(w, a, mu, prob.loss) - prob.loss.value(w);
      worst_f = std::min(worst_f, gap);
      ok = ok && gap >= -slack;
      anchor_err = std::max(anchor_err, std::abs(quad_surrogate_value(a, a, mu, prob.loss) - prob.loss.value(a)));
    }
  }
  for (const auto& pen : pens) {
    ++configs;
    for (int s = 0; s < 10000; ++s) {
      Vector w(12), a(12);
      for (Index j = 0; j < 12; ++j) {
        w[j] = unif(rng);
        a[j] = unif(rng);
      }
      // Mix in exact zeros on both sides.
      if (s % 7 == 0) w[s % 12] = 0.0;
      if (s % 11 == 0) a[s % 12] = 0.0;
      double r_direct = 0.0;
      for (Index j = 0; j < 12; ++j) r_direct += oracle::zeta(std::abs(w[j]), pen);
      const double gap = linearized_penalty_value(w, a, pen) - r_direct;
      worst_r = std::min(worst_r, gap);
      ok = ok && gap >= -slack;
      double r_anchor = 0.0;
      for (Index j = 0; j < 12; ++j) r_anchor += oracle::zeta(std::abs(a[j]), pen);
      anchor_err = std::max(anchor_err, std::abs(linearized_penalty_value(a, a, pen) - r_anchor));
    }
  }
  ok = ok && anchor_err <= slack;
  report(2, ok,
         std::to_string(configs) + " configurations x 1e4 samples, min(Q_f - f) " + fmt(worst_f) +
             ", min(Q_r - r) " + fmt(worst_r) + ", anchor error " + fmt(anchor_err) + " (slack 1e-10)");
}

void criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u_dist(-5.0, 5.0), a_dist(0.05, 2.0);
  const std::vector<PenaltySpec> pens = {PenaltySpec::log_normalized(0.5, 3.0), PenaltySpec::log_epsilon(0.3, 0.2),
                                         PenaltySpec::scad(0.5, 3.7), PenaltySpec::mcp(0.5, 3.0),
                                         PenaltySpec::capped_l1(0.5, 1.0)};
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pen : pens) {
    for (int i = 0; i < 1000; ++i) {
      const double u = u_dist(rng), alpha = a_dist(rng);
      const double w = scalar_prox(u, alpha, pen);
      const double excess = oracle::prox_objective(w, u, alpha, pen) - oracle::grid_prox_min(u, alpha, pen, 1e-4);
      worst = std::max(worst, excess);
      ok = ok && excess <= 1e-6;
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 30.0;
  report(3, ok,
         "5 penalties x 1000 (u, alpha), max prox excess over grid " + fmt(worst) + " (<= 1e-6), " +
             fmt(std::round(secs * 100) / 100) + " s (< 30 s)");
}

void criterion_4() {
  bool ok = !descent_suite_runs.empty();
  long steps = 0;
  double worst_bound = std::numeric_limits<double>::infinity(), worst_member = worst_bound;
  for (const auto& r : descent_suite_runs) {
    const double mu = r.trace.mu;
    const double lz = curvature_lipschitz(r.prob.penalty);
    const double lf = r.trace.lipschitz;
    for (std::size_t k = 0; k + 1 < r.trace.iterates.size(); ++k) {
      const Vector& w = r.trace.iterates[k];
      const Vector& wn = r.trace.iterates[k + 1];
      const auto rep = subgradient_residual(wn, w, r.prob, mu, r.scheme);
      const double bound = (mu + lf + lz) * (wn - w).norm();
      const double kkt = kkt_residual(wn, r.prob);
      worst_bound = std::min(worst_bound, bound - rep.B_norm);
      worst_member = std::min(worst_member, rep.B_norm - kkt);
      ok = ok && rep.B_norm <= bound + 1e-8 && kkt <= rep.B_norm + 1e-8;
      ++steps;
    }
  }
  report(4, ok,
         std::to_string(steps) + " steps, min(bound - B_norm) " + fmt(worst_bound) + ", min(B_norm - kkt) " +
             fmt(worst_member) + " (slack 1e-8)");
}

// Criterion 5 problem, shared with 6 and 10.
ProblemInstance c5_problem() {
  return testprob::synthetic(LossKind::Logistic, PenaltySpec::log_epsilon(0.02, 0.1), 200, 50, 5, 0.5, 42);
}

IterateTrace c5_a, c5_b;

void criterion_5() {
  const auto prob = c5_problem();
  bool ok = true;
  std::string detail;
  for (Scheme s : {Scheme::A, Scheme::B}) {
    MmConfig cfg;
    cfg.scheme = s;
    cfg.tol = 1e-13;
    cfg.max_iter = 5000;
    const auto t0 = Clock::now();
    IterateTrace t = run_mm(prob, cfg);
    const double secs = seconds_since(t0);
    const double kkt = kkt_residual(t.final_w, prob);
    const double tail = finite_length(t).tail_after_halfway;
    ok = ok && t.converged && t.iterations <= 5000 && kkt < 1e-6 && tail <= 1e-4 && secs < 10.0;
    detail += std::string(s == Scheme::A ? "a" : "b") + ": " + std::to_string(t.iterations) + " it, kkt " +
              fmt(kkt) + ", tail " + fmt(tail) + ", " + fmt(std::round(secs * 1000) / 1000) + " s; ";
    (s == Scheme::A ? c5_a : c5_b) = std::move(t);
  }
  detail += "limits kkt < 1e-6, tail <= 1e-4, <= 5000 it, < 10 s";
  report(5, ok, detail);
}

void criterion_6() {
  const double fa = c5_a.final_objective, fb = c5_b.final_objective;
  const double gap = std::abs(fa - fb), limit = 1e-4 * (1.0 + std::abs(fa));
  report(6, c5_a.converged && c5_b.converged && gap <= limit,
         "F_a " + fmt(fa) + ", F_b " + fmt(fb) + ", gap " + fmt(gap) + " (<= " + fmt(limit) + ")");
}

void criterion_7() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const double lam = 0.01 + 0.2 * unif(rng), eps = 0.02 + 0.5 * unif(rng);
    const LossKind kind = s % 2 == 0 ? LossKind::LeastSquares : LossKind::Logistic;
    const auto prob = testprob::synthetic(kind, PenaltySpec::log_epsilon(lam, eps), 40, 8, 3, 0.3,
                                          500 + static_cast<std::uint64_t>(s));
    Vector w = oracle::random_vector(rng, 8, 1.5);
    if (s % 3 == 0) w[s % 8] = 0.0;
    const double mu = 1.01 * prob.loss.lipschitz();
    const Vector got = step_b(w, prob, mu);
    const Vector z = w - prob.loss.gradient(w) / mu;
    for (Index j = 0; j < 8; ++j) {
      const double omega = lam / (std::abs(w[j]) + eps);
      worst = std::max(worst, std::abs(got[j] - oracle::bisect_weighted_l1(z[j], mu, omega)));
    }
  }
  report(7, worst <= 1e-10, "100 states, max |step_b - bisection| " + fmt(worst) + " (<= 1e-10)");
}

ProblemInstance c89_problem() {
  return testprob::synthetic(LossKind::LeastSquares, PenaltySpec::mcp(0.05, 8.0), 100, 20, 5, 0.5, 42);
}

void criterion_8() {
  const auto prob = c89_problem();
  const double lmin = oracle::dense_lambda_min(Matrix(prob.loss.data().design()));
  MmConfig cfg;
  cfg.scheme = Scheme::A;
  cfg.tol = 1e-12;
  const IterateTrace t = run_mm(prob, cfg);
  const RateFit fit = rate_fit(t);
  const bool run_ok = lmin > 0.0 && t.converged && fit.regime == Regime::Linear && fit.rate_constant > 0.0 &&
                      fit.rate_constant < 1.0 && fit.fit_quality >= 0.9;

  std::vector<double> geo, harm;
  for (int k = 0; k < 80; ++k) geo.push_back(std::pow(0.5, k));
  for (int k = 1; k <= 400; ++k) harm.push_back(1.0 / k);
  const RateFit g = rate_fit_errors(geo), h = rate_fit_errors(harm);
  const bool seq_ok = g.regime == Regime::Linear && std::abs(g.rate_constant - 0.5) <= 1e-6 &&
                      h.regime == Regime::Sublinear && std::abs(h.rate_constant - 1.0) <= 0.05;
  report(8, run_ok && seq_ok,
         "LS+MCP: " + std::string(regime_name(fit.regime)) + " rho " + fmt(fit.rate_constant) + " fit " +
             fmt(fit.fit_quality) + " (lambda_min " + fmt(lmin) + "); 0.5^k -> " + regime_name(g.regime) + " " +
             fmt(g.rate_constant) + "; 1/k -> " + regime_name(h.regime) + " exponent " + fmt(h.rate_constant));
}

void criterion_9() {
  const auto prob = c89_problem();
  const DcProblem dc(prob.loss, dc_decompose(prob.penalty));
  CccpConfig cfg;
  cfg.tol = 1e-12;
  cfg.inner_tol = 1e-10;
  const IterateTrace t = run_cccp(dc, cfg);
  const auto desc = cccp_descent_check(t, dc.gamma_u());
  const double lv = dc.concave().lipschitz();
  double worst_res = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < t.records.size(); ++k)
    worst_res = std::min(worst_res, lv * t.records[k].step_norm - t.records[k].residual);
  const bool res_ok = worst_res >= -1e-10;

  MmConfig mc;
  mc.scheme = Scheme::A;
  mc.tol = 1e-12;
  const IterateTrace ta = run_mm(prob, mc);
  const double f_mm = ta.final_objective, f_cc = prob.objective(t.final_w);
  const double gap = std::abs(f_cc - f_mm), limit = 1e-4 * (1.0 + std::abs(f_mm));

  const Index p = dc.dim();
  Box box{Vector::Constant(p, -0.5), Vector::Constant(p, 1.0)};
  const DcProblem boxed(prob.loss, dc_decompose(prob.penalty), 0.0, box);
  const IterateTrace tb = run_cccp(boxed, cfg);
  bool feasible = !tb.iterates.empty();
  long active = 0;
  for (const auto& w : tb.iterates)
    feasible = feasible && (w.array() >= box.lo.array()).all() && (w.array() <= box.hi.array()).all();
  for (Index j = 0; j < p; ++j) active += tb.final_w[j] == box.lo[j] || tb.final_w[j] == box.hi[j];
  const bool box_desc = cccp_descent_check(tb, boxed.gamma_u()).ok;

  report(9, t.converged && desc.ok && res_ok && gap <= limit && feasible && box_desc,
         "descent margin " + fmt(desc.worst_margin) + ", residual margin " + fmt(worst_res) + ", F_cccp " +
             fmt(f_cc) + " vs F_mm_a " + fmt(f_mm) + " gap " + fmt(gap) + " (<= " + fmt(limit) + "), box " +
             (feasible ? "feasible" : "INFEASIBLE") + " with " + std::to_string(active) + " active bounds");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_10() {
  // Fixture round trip: text -> dataset -> text -> dataset.
  const auto fixture = std::filesystem::path(NMM_FIXTURE_DIR) / "small.svm";
  const Dataset d = read_libsvm(fixture);
  std::ostringstream once;
  write_libsvm(d, once);
  const bool text_ok = once.str() == "+1 1:0.5 3:2\n-1 2:-1.25 4:3\n+1 1:0.001 2:4 3:-0.75 4:-7.5\n";
  std::istringstream back_in(once.str());
  const Dataset back = parse_libsvm(back_in);
  std::ostringstream twice;
  write_libsvm(back, twice);
  const bool round_ok = text_ok && Matrix(back.design()) == Matrix(d.design()) && back.targets() == d.targets() &&
                        twice.str() == once.str();

  // CSV objective column of converged runs at the default tolerance. Much
  // tighter tolerances reach a plateau where F jitters by a few ulps.
  bool mono = true;
  long rows = 0;
  const auto csv = std::filesystem::temp_directory_path() / "nmm_accept_trace.csv";
  for (Scheme s : {Scheme::A, Scheme::B}) {
    for (const auto& prob : {c5_problem(), c89_problem()}) {
      MmConfig cfg;
      cfg.scheme = s;
      const IterateTrace t = run_mm(prob, cfg);
      mono = mono && t.converged;
      write_trace(t, TraceFormat::Csv, csv);
      std::ifstream in(csv);
      std::string line;
      std::getline(in, line);
      double prev = std::numeric_limits<double>::infinity();
      while (std::getline(in, line)) {
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        const double obj = std::stod(line.substr(a + 1, b - a - 1));
        mono = mono && obj <= prev;
        prev = obj;
        ++rows;
      }
    }
  }
  std::filesystem::remove(csv);

  // Same seed, same bytes: traces, weights and generated data.
  const auto dir = std::filesystem::temp_directory_path();
  bool same = true;
  for (const char* fmt_name : {"csv", "json"}) {
    std::vector<std::string> outs;
    for (int rep = 0; rep < 2; ++rep) {
      const auto trace_path = (dir / ("nmm_accept_seed" + std::to_string(rep) + "." + fmt_name)).string();
      const auto w_path = (dir / ("nmm_accept_seed" + std::to_string(rep) + ".w")).string();
      const std::vector<std::string> args = {"nonconvex_mm", "solve", "--loss", "ls", "--penalty", "mcp",
                                             "--lambda", "0.05", "--seed", "123", "--no-timing", "--format",
                                             fmt_name, "--out", trace_path, "--weights-out", w_path};
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      same = same && cli::run(static_cast<int>(argv.size()), argv.data(), out, err) == 0;
      outs.push_back(slurp(trace_path) + "\n--\n" + slurp(w_path) + "\n--\n" + out.str());
      std::filesystem::remove(trace_path);
      std::filesystem::remove(w_path);
    }
    same = same && outs[0] == outs[1] && outs[0].size() > 100;
  }
  std::ostringstream g1, g2;
  write_libsvm(synth_generate({60, 10, 3, 0.4, 123, Task::Regression}).data, g1);
  write_libsvm(synth_generate({60, 10, 3, 0.4, 123, Task::Regression}).data, g2);
  same = same && g1.str() == g2.str();

  report(10, round_ok && mono && same,
         std::string("fixture round trip ") + (round_ok ? "exact" : "MISMATCH") + ", objective column over " +
             std::to_string(rows) + " rows " + (mono ? "nonincreasing" : "INCREASES") + ", seeded outputs " +
             (same ? "byte-identical" : "DIFFER"));
}

template <class Fn>
void guarded(int id, Fn fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, criterion_1);
  guarded(2, criterion_2);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(7, criterion_7);
  guarded(8, criterion_8);
  guarded(9, criterion_9);
  guarded(10, criterion_10);
  std::printf("%s: %d failing\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
