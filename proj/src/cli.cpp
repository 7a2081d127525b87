#include "nmm/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "nmm/diagnostics.hpp"

namespace nmm::cli {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void strip_timing(IterateTrace& trace) {
  for (IterateRecord& r : trace.records) r.elapsed_sec = 0.0;
}

TraceMetadata metadata(const RunConfig& cfg, const PenaltySpec& spec, double mu,
                       std::optional<std::uint64_t> seed) {
  TraceMetadata meta;
  meta.scheme = cfg.solver == Solver::Cccp ? "cccp" : scheme_name(cfg.scheme);
  meta.penalty = spec.name();
  meta.lambda = spec.lambda();
  meta.shape = spec.shape();
  meta.mu = mu;
  if (seed) {
    meta.seed = *seed;
    meta.has_seed = true;
  }
  return meta;
}

std::optional<Box> make_box(const RunConfig& cfg, Index p) {
  if (!cfg.box_lo && !cfg.box_hi) return std::nullopt;
  const double inf = std::numeric_limits<double>::infinity();
  Box box{Vector::Constant(p, cfg.box_lo.value_or(-inf)), Vector::Constant(p, cfg.box_hi.value_or(inf))};
  return box;
}

IterateTrace solve_mm(const ProblemInstance& prob, const RunConfig& cfg, Scheme scheme) {
  MmConfig mc;
  mc.scheme = scheme;
  mc.rho = cfg.rho;
  mc.mu_override = cfg.mu;
  mc.max_iter = cfg.max_iter;
  mc.tol = cfg.tol;
  mc.allow_non_majorizing = cfg.allow_non_majorizing;
  return run_mm(prob, mc);
}

DcProblem make_dc(const ProblemInstance& prob, const RunConfig& cfg) {
  return DcProblem(prob.loss, dc_decompose(prob.penalty), cfg.ridge, make_box(cfg, prob.dim()));
}

CccpConfig cccp_config(const RunConfig& cfg) {
  CccpConfig cc;
  cc.max_iter = cfg.max_iter;
  cc.tol = cfg.tol;
  cc.inner_tol = cfg.inner_tol;
  cc.inner_max_iter = cfg.inner_max_iter;
  return cc;
}

void write_outputs(const IterateTrace& trace, const RunConfig& cfg, const TraceMetadata& meta) {
  if (cfg.out_path) write_trace(trace, cfg.format, *cfg.out_path, meta);
  if (cfg.weights_out) {
    std::ofstream w(*cfg.weights_out);
    if (!w) throw std::runtime_error("cannot open " + *cfg.weights_out + " for writing");
    for (Index i = 0; i < trace.final_w.size(); ++i) w << format_double(trace.final_w[i]) << '\n';
    if (!w) throw std::runtime_error("write failed for " + *cfg.weights_out);
  }
}

void print_summary(const IterateTrace& trace, std::ostream& out) {
  Index nnz = 0;
  for (Index i = 0; i < trace.final_w.size(); ++i) nnz += trace.final_w[i] != 0.0;
  out << "method: " << trace.method << '\n'
      << "objective: " << format_double(trace.final_objective) << '\n'
      << "iterations: " << trace.iterations << '\n'
      << "residual: " << format_double(trace.final_residual) << '\n'
      << "converged: " << (trace.converged ? "yes" : "no") << '\n'
      << "nonzeros: " << nnz << '/' << trace.final_w.size() << '\n';
  if (trace.final_w.size() <= 50) {
    out << "w:";
    for (Index i = 0; i < trace.final_w.size(); ++i) out << ' ' << format_double(trace.final_w[i]);
    out << '\n';
  }
}

double per_iteration_seconds(const IterateTrace& t) {
  if (t.records.empty() || t.iterations == 0) return 0.0;
  return t.records.back().elapsed_sec / static_cast<double>(t.iterations);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace

unsigned bench_threads() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NONCONVEX_MM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = static_cast<unsigned>(v);
  }
  return std::min(cap, 2u);
}

PenaltySpec make_penalty(const RunConfig& cfg) {
  const std::string& k = cfg.penalty;
  if (k == "log") return PenaltySpec::log_normalized(cfg.lambda, cfg.theta);
  if (k == "log-eps") return PenaltySpec::log_epsilon(cfg.lambda, cfg.epsilon);
  if (k == "scad") return PenaltySpec::scad(cfg.lambda, cfg.theta);
  if (k == "mcp") return PenaltySpec::mcp(cfg.lambda, cfg.gamma);
  if (k == "capped-l1") return PenaltySpec::capped_l1(cfg.lambda, cfg.theta);
  throw ConfigError("unknown penalty '" + k + "'");
}

ProblemInstance make_problem(const RunConfig& cfg, std::optional<std::uint64_t>* seed_used) {
  const Task task = cfg.loss == LossKind::Logistic ? Task::Classification : Task::Regression;
  std::shared_ptr<const Dataset> data;
  if (cfg.data_path) {
    LibsvmOptions lo;
    lo.task = task;
    lo.num_features = cfg.num_features;
    data = std::make_shared<const Dataset>(read_libsvm(*cfg.data_path, lo));
    if (seed_used) *seed_used = std::nullopt;
  } else {
    SyntheticSpec ss;
    ss.n = cfg.n;
    ss.p = cfg.p;
    ss.sparsity = cfg.sparsity;
    ss.noise_sd = cfg.noise;
    ss.seed = cfg.seed;
    ss.task = task;
    data = std::make_shared<const Dataset>(synth_generate(ss).data);
    if (seed_used) *seed_used = cfg.seed;
  }
  return ProblemInstance{SmoothLoss(cfg.loss, std::move(data)), make_penalty(cfg)};
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::optional<std::uint64_t> seed;
    const ProblemInstance prob = make_problem(cfg, &seed);
    IterateTrace trace;
    if (cfg.solver == Solver::Cccp) {
      trace = run_cccp(make_dc(prob, cfg), cccp_config(cfg));
    } else {
      trace = solve_mm(prob, cfg, cfg.scheme);
    }
    for (const auto& w : trace.warnings) err << "warning: " << w << '\n';
    if (cfg.no_timing) strip_timing(trace);
    write_outputs(trace, cfg, metadata(cfg, prob.penalty, trace.mu, seed));
    print_summary(trace, out);
    return trace.converged ? kConverged : kNotConverged;
  });
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemInstance prob = make_problem(cfg);
    const bool run_b = prob.penalty.smooth();
    if (!run_b) err << "note: scheme b is unsupported for " << prob.penalty.name() << "; running a only\n";

    IterateTrace ta, tb;
    if (run_b && bench_threads() >= 2) {
      auto fb = std::async(std::launch::async, [&] { return solve_mm(prob, cfg, Scheme::B); });
      ta = solve_mm(prob, cfg, Scheme::A);
      tb = fb.get();
    } else {
      ta = solve_mm(prob, cfg, Scheme::A);
      if (run_b) tb = solve_mm(prob, cfg, Scheme::B);
    }

    const double sec_a = per_iteration_seconds(ta);
    const double sec_b = per_iteration_seconds(tb);
    if (cfg.no_timing) {
      strip_timing(ta);
      strip_timing(tb);
    }

    if (cfg.out_path) {
      std::ofstream csv(*cfg.out_path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot open " + *cfg.out_path + " for writing");
      csv << "iter,elapsed_sec,objective_a,objective_b,elapsed_sec_b\n";
      const std::size_t rows = std::max(ta.records.size(), tb.records.size());
      for (std::size_t k = 0; k < rows; ++k) {
        csv << k << ',';
        if (k < ta.records.size()) csv << format_double(ta.records[k].elapsed_sec);
        csv << ',';
        if (k < ta.records.size()) csv << format_double(ta.records[k].objective);
        csv << ',';
        if (k < tb.records.size()) csv << format_double(tb.records[k].objective);
        csv << ',';
        if (k < tb.records.size()) csv << format_double(tb.records[k].elapsed_sec);
        csv << '\n';
      }
      if (!csv) throw std::runtime_error("write failed for " + *cfg.out_path);
    }

    out << "objective_a: " << format_double(ta.final_objective) << " (" << ta.iterations
        << " iterations)\n";
    if (run_b) {
      const double gap = std::abs(ta.final_objective - tb.final_objective);
      const double ref = std::min(ta.final_objective, tb.final_objective);
      out << "objective_b: " << format_double(tb.final_objective) << " (" << tb.iterations
          << " iterations)\n";
      out << "summary: gap=" << format_double(gap) << " reference=" << format_double(ref)
          << " sec_per_iter_a=" << format_double(sec_a) << " sec_per_iter_b=" << format_double(sec_b)
          << " time_ratio_b_over_a=" << format_double(sec_a > 0.0 ? sec_b / sec_a : 0.0) << '\n';
    } else {
      out << "objective_b: unsupported\n";
      out << "summary: sec_per_iter_a=" << format_double(sec_a) << '\n';
    }
    const bool ok = ta.converged && (!run_b || tb.converged);
    return ok ? kConverged : kNotConverged;
  });
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    std::optional<std::uint64_t> seed;
    const ProblemInstance prob = make_problem(cfg, &seed);
    const bool cccp = cfg.solver == Solver::Cccp;
    std::optional<DcProblem> dc;
    if (cccp) dc.emplace(make_dc(prob, cfg));

    IterateTrace trace;
    try {
      trace = cccp ? run_cccp(*dc, cccp_config(cfg)) : solve_mm(prob, cfg, cfg.scheme);
    } catch (const NumericalError& e) {
      out << "descent: FAIL (" << e.what() << ")\n";
      err << "failing checks: descent\n";
      return kDiagnosticFailure;
    }
    for (const auto& w : trace.warnings) err << "warning: " << w << '\n';

    std::vector<std::string> failures;
    nlohmann::json diag;
    if (cccp) {
      const CccpDescentReport d = cccp_descent_check(trace, dc->gamma_u());
      out << "descent: " << (d.ok ? "ok" : "FAIL") << " worst_margin=" << format_double(d.worst_margin)
          << " gamma_u=" << format_double(dc->gamma_u()) << '\n';
      if (!d.ok) failures.emplace_back("descent");
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        worst = std::min(worst, dc->concave().lipschitz() * r.step_norm - r.residual);
      }
      if (trace.records.size() < 2) worst = 0.0;
      const bool ok = worst >= -1e-10;
      out << "residual_bound: " << (ok ? "ok" : "FAIL") << " worst_margin=" << format_double(worst) << '\n';
      if (!ok) failures.emplace_back("residual_bound");
      diag["descent_worst_margin"] = d.worst_margin;
      diag["residual_bound_worst_margin"] = worst;
    } else {
      const double modulus = trace.mu - trace.lipschitz;
      const DescentReport d = check_descent(trace, modulus);
      out << "descent: " << (d.ok ? "ok" : "FAIL") << " worst_margin=" << format_double(d.worst_margin)
          << " modulus=" << format_double(modulus) << '\n';
      if (!d.ok) failures.emplace_back("descent");
      const bool linearized = cfg.scheme == Scheme::B;
      const BoundReport b = check_subgradient_bounds(trace, prob, linearized ? Scheme::B : Scheme::A);
      out << "residual_bound: " << (b.ok ? "ok" : "FAIL")
          << " worst_bound_margin=" << format_double(b.worst_bound_margin)
          << " worst_membership_margin=" << format_double(b.worst_membership_margin) << '\n';
      if (!b.ok) failures.emplace_back("residual_bound");
      diag["descent_worst_margin"] = d.worst_margin;
      diag["residual_bound_worst_margin"] = b.worst_bound_margin;
      diag["membership_worst_margin"] = b.worst_membership_margin;
    }

    const FiniteLength fl = finite_length(trace);
    out << "finite_length: total=" << format_double(fl.total)
        << " tail_after_halfway=" << format_double(fl.tail_after_halfway) << '\n';
    const RateFit rf = rate_fit(trace);
    out << "rate: regime=" << regime_name(rf.regime) << " constant=" << format_double(rf.rate_constant)
        << " fit_quality=" << format_double(rf.fit_quality) << '\n';
    out << "iterations: " << trace.iterations << " converged: " << (trace.converged ? "yes" : "no")
        << '\n';
    diag["finite_length_total"] = fl.total;
    diag["finite_length_tail"] = fl.tail_after_halfway;
    diag["regime"] = regime_name(rf.regime);
    diag["rate_constant"] = rf.rate_constant;
    diag["fit_quality"] = rf.fit_quality;

    if (cfg.no_timing) strip_timing(trace);
    TraceMetadata meta = metadata(cfg, prob.penalty, trace.mu, seed);
    meta.diagnostics = diag;
    write_outputs(trace, cfg, meta);

    if (!failures.empty()) {
      err << "failing checks:";
      for (const auto& f : failures) err << ' ' << f;
      err << '\n';
      return kDiagnosticFailure;
    }
    return kConverged;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Majorization-minimization solvers for nonconvex sparse regularization"};
  app.require_subcommand(1);

  std::string loss = "logistic";
  std::string scheme = "b";
  std::string solver = "mm";
  std::string format = "csv";
  double alpha = 0.0;
  const std::map<std::string, LossKind> losses{{"ls", LossKind::LeastSquares},
                                              {"logistic", LossKind::Logistic}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--data", cfg.data_path, "libsvm file (synthetic data when omitted)");
    sub->add_option("--features", cfg.num_features, "force the libsvm feature count");
    sub->add_option("--n", cfg.n, "synthetic sample count")->check(CLI::PositiveNumber);
    sub->add_option("--p", cfg.p, "synthetic feature count")->check(CLI::PositiveNumber);
    sub->add_option("--k", cfg.sparsity, "synthetic true nonzeros")->check(CLI::NonNegativeNumber);
    sub->add_option("--noise", cfg.noise, "synthetic noise standard deviation");
    sub->add_option("--seed", cfg.seed, "synthetic data seed");
    sub->add_option("--loss", loss, "ls | logistic")->check(CLI::IsMember({"ls", "logistic"}));
    sub->add_option("--penalty", cfg.penalty, "log | log-eps | scad | mcp | capped-l1")
        ->check(CLI::IsMember({"log", "log-eps", "scad", "mcp", "capped-l1"}));
    sub->add_option("--lambda", cfg.lambda, "penalty weight");
    sub->add_option("--theta", cfg.theta, "LOG / SCAD / capped-l1 shape");
    sub->add_option("--gamma", cfg.gamma, "MCP shape");
    sub->add_option("--epsilon", cfg.epsilon, "epsilon of lambda*log(1+|t|/epsilon)");
    sub->add_option("--alpha", alpha, "alpha of lambda*log(1+alpha|t|); sets epsilon = 1/alpha");
    sub->add_option("--solver", solver, "mm | cccp")->check(CLI::IsMember({"mm", "cccp"}));
    sub->add_option("--scheme", scheme, "a (exact prox) | b (linearized penalty)")
        ->check(CLI::IsMember({"a", "b"}));
    sub->add_option("--rho", cfg.rho, "mu = rho * L_f");
    sub->add_option("--mu", cfg.mu, "fixed surrogate curvature");
    sub->add_flag("--allow-non-majorizing", cfg.allow_non_majorizing, "accept mu < L_f");
    sub->add_option("--tol", cfg.tol, "stop when ||w_{k+1} - w_k||_inf <= tol");
    sub->add_option("--max-iter", cfg.max_iter, "iteration cap");
    sub->add_option("--ridge", cfg.ridge, "CCCP: ridge added to the convex part");
    sub->add_option("--box-lo", cfg.box_lo, "CCCP: lower bound on every coordinate");
    sub->add_option("--box-hi", cfg.box_hi, "CCCP: upper bound on every coordinate");
    sub->add_option("--inner-tol", cfg.inner_tol, "CCCP subproblem tolerance");
    sub->add_option("--inner-max-iter", cfg.inner_max_iter, "CCCP subproblem iteration cap");
    sub->add_option("--out", cfg.out_path, "trace output path");
    sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--weights-out", cfg.weights_out, "final weights, one per line");
    sub->add_flag("--no-timing", cfg.no_timing, "write elapsed_sec as 0");
  };

  CLI::App* solve = app.add_subcommand("solve", "run one solver and write its trace");
  CLI::App* bench = app.add_subcommand("bench", "compare MM scheme a and scheme b");
  CLI::App* diagnose = app.add_subcommand("diagnose", "run a solver and check the convergence theory");
  for (CLI::App* sub : {solve, bench, diagnose}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kConverged : kUsage;
  }

  cfg.loss = losses.at(loss);
  cfg.scheme = scheme == "a" ? Scheme::A : Scheme::B;
  cfg.solver = solver == "cccp" ? Solver::Cccp : Solver::Mm;
  cfg.format = format == "json" ? TraceFormat::Json : TraceFormat::Csv;
  if (alpha > 0.0) cfg.epsilon = 1.0 / alpha;

  if (solve->parsed()) {
    cfg.subcommand = "solve";
    return cmd_solve(cfg, out, err);
  }
  if (bench->parsed()) {
    cfg.subcommand = "bench";
    return cmd_bench(cfg, out, err);
  }
  cfg.subcommand = "diagnose";
  return cmd_diagnose(cfg, out, err);
}

}  // namespace nmm::cli
