#pragma once

#include <optional>
#include <vector>

#include "twlp/lp.hpp"

namespace twlp {

struct ReferenceResult {
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  double gap = 0.0;        // final complementarity, summed
  double residual = 0.0;   // |Ax - b|
};

// Primal-dual predictor-corrector on the box-constrained LP with the normal
// equations solved by Eigen's sparse LDL^T.  Independent of the tree code.
// Throws SolverError after max_iter iterations.
ReferenceResult reference_solve(const LpProblem& P, double tol = 1e-11, int max_iter = 200);

// Optimum over all basic solutions; n <= 16.  nullopt when no vertex is
// feasible.  Rows of A must be linearly independent.
std::optional<ReferenceResult> vertex_enumeration(const LpProblem& P);

}  // namespace twlp
