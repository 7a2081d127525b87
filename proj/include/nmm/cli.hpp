#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "nmm/cccp.hpp"
#include "nmm/data_io.hpp"
#include "nmm/mm_solver.hpp"

namespace nmm::cli {

enum ExitCode : int {
  kConverged = 0,
  kUsage = 1,
  kNotConverged = 2,
  kDiagnosticFailure = 3,
};

enum class Solver { Mm, Cccp };

struct RunConfig {
  std::string subcommand = "solve";

  // Data: a libsvm file, or a synthetic problem when no path is given.
  std::optional<std::string> data_path;
  std::optional<Index> num_features;
  Index n = 200;
  Index p = 50;
  Index sparsity = 5;
  double noise = 0.5;
  std::uint64_t seed = 42;

  LossKind loss = LossKind::Logistic;
  std::string penalty = "log-eps";
  double lambda = 0.02;
  double theta = 3.7;
  double gamma = 3.0;
  double epsilon = 0.1;

  Solver solver = Solver::Mm;
  Scheme scheme = Scheme::B;
  double rho = 1.01;
  std::optional<double> mu;
  bool allow_non_majorizing = false;
  double tol = 1e-8;
  long max_iter = 5000;

  double ridge = 0.0;
  std::optional<double> box_lo;
  std::optional<double> box_hi;
  double inner_tol = 1e-10;
  long inner_max_iter = 10000;

  std::optional<std::string> out_path;
  TraceFormat format = TraceFormat::Csv;
  std::optional<std::string> weights_out;
  // Write elapsed_sec as 0 so repeated runs produce byte-identical files.
  bool no_timing = false;
};

PenaltySpec make_penalty(const RunConfig& cfg);
ProblemInstance make_problem(const RunConfig& cfg, std::optional<std::uint64_t>* seed_used = nullptr);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv (argv[0] is the program name) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Concurrency cap for bench: NONCONVEX_MM_THREADS if set, else the hardware
// thread count, never more than 2.
unsigned bench_threads();

}  // namespace nmm::cli
