#pragma once

#include <string>
#include <vector>

#include "nmm/common.hpp"

namespace nmm {

// Record k holds F(w^(k)), the step ||w^(k) - w^(k-1)|| that produced it
// (0 for k = 0), and the solver's residual at w^(k).
struct IterateRecord {
  long iter = 0;
  double objective = 0.0;
  double step_norm = 0.0;
  double residual = 0.0;
  double elapsed_sec = 0.0;
};

struct IterateTrace {
  std::string method;  // "mm-a", "mm-b" or "cccp"
  std::vector<IterateRecord> records;
  // w^(0), w^(1), ...; empty when the run was configured without a trace.
  std::vector<Vector> iterates;
  Vector final_w;

  double mu = 0.0;         // surrogate curvature (MM only)
  double lipschitz = 0.0;  // L_f of the smooth loss
  double inner_tol = 0.0;  // CCCP subproblem tolerance
  long iterations = 0;     // completed updates
  bool converged = false;
  long inexact_steps = 0;  // CCCP steps whose inner solve hit its cap
  double final_objective = 0.0;
  double final_residual = 0.0;
  std::vector<std::string> warnings;
};

}  // namespace nmm
