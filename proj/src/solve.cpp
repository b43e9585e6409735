#include <chrono>
#include <cmath>
#include <numeric>

#include "twlp/cpm.hpp"
#include "twlp/errors.hpp"
#include "twlp/ipm.hpp"

namespace twlp {

std::unique_ptr<CenteringEngine> make_engine(const SolveOptions& opt) {
  if (opt.mode == SolveMode::Exact) return std::make_unique<ExactEngine>();
  CpmOptions co;
  co.seed = opt.seed;
  co.window = opt.window;
  co.debug = opt.debug;
  return std::make_unique<MaintainedEngine>(co);
}

Solution solve(const SparseMatrix& A0, const std::vector<double>& b0, const std::vector<double>& c,
               const std::vector<double>& lo, const std::vector<double>& hi, const TreeDecomposition& td,
               const SolveOptions& opt) {
  const auto clock0 = std::chrono::steady_clock::now();
  const int n = A0.cols(), d = A0.rows();
  if (static_cast<int>(b0.size()) != d || static_cast<int>(c.size()) != n || static_cast<int>(lo.size()) != n ||
      static_cast<int>(hi.size()) != n)
    throw StructuralError("solve: dimension mismatch");
  if (!(opt.eps > 0.0 && opt.eps <= 0.5)) throw ValueError("eps must lie in (0, 1/2]");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
      throw ValueError("bounds must be finite with lo < hi");
  validate_td(dual_graph(A0), td);

  // scalar barrier per column, rows in elimination order
  const SparseMatrix A1 = build_csc(A0.to_triplets(), d, n);
  OrderedSystem sys = order_system(A1, td);
  std::vector<double> b(d);
  for (int i = 0; i < d; ++i) b[sys.perm[i]] = b0[i];

  LogBarrier phi(lo, hi);
  double L = std::sqrt(std::inner_product(c.begin(), c.end(), c.begin(), 0.0));
  if (!(L > 0.0)) L = 1.0;
  double R = 0.0, minw = INFINITY;
  for (int i = 0; i < n; ++i) {
    R += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    minw = std::min(minw, hi[i] - lo[i]);
  }
  R = std::sqrt(R);
  const double r = opt.inner_radius > 0 ? opt.inner_radius : 1e-3 * minw;

  IpmParams prm = IpmParams::for_barrier(phi);
  prm.lipschitz = L;
  prm.outer_radius = R;
  prm.inner_radius = r;
  prm.t_start = initial_path_parameter(n, prm.kappa, L, R, r, prm.delta_init);
  prm.t_end = opt.eps * std::min(1.0, L * R) / (4.0 * prm.kappa);

  Solution sol;
  sol.mode = opt.mode;
  sol.lipschitz = L;
  sol.outer_radius = R;
  sol.t_end = prm.t_end;

  ModifiedProgram M = build_initial_modified_program(sys.A, sys.T, b, c, phi, prm);
  IpmParams prm1 = IpmParams::for_barrier(M.phi);
  prm1.lipschitz = L;
  prm1.outer_radius = R;
  prm1.inner_radius = r;
  prm1.t_start = M.t_start;
  prm1.t_end = L * R;

  CenteringProblem P1;
  P1.A = &M.A;
  P1.T = &sys.T;
  P1.c = M.c;
  P1.phi = &M.phi;
  P1.norm_A = M.A.norm2_estimate();

  sol.phase1.record_trace = sol.phase2.record_trace = opt.record_trace;
  auto engine = make_engine(opt);
  PathPoint p1 = centering(P1, prm1, M.start, prm1.t_end, *engine, opt.centering, sol.phase1);
  PathPoint p = extract_original_point(p1, n, phi);

  CenteringProblem P2;
  P2.A = &sys.A;
  P2.T = &sys.T;
  P2.c = c;
  P2.phi = &phi;
  P2.norm_A = sys.A.norm2_estimate();
  auto engine2 = make_engine(opt);
  PathPoint p2 = centering(P2, prm, p, prm.t_end, *engine2, opt.centering, sol.phase2);

  sol.x = p2.x;
  sol.s = dual_slack(P2, p2.y);
  sol.objective = std::inner_product(c.begin(), c.end(), sol.x.begin(), 0.0);
  std::vector<double> ax = A0.multiply(sol.x);
  double res = 0.0;
  for (int i = 0; i < d; ++i) res += (ax[i] - b0[i]) * (ax[i] - b0[i]);
  sol.residual = std::sqrt(res);
  sol.interior = true;
  for (int i = 0; i < n; ++i)
    if (!(sol.x[i] > lo[i] && sol.x[i] < hi[i])) sol.interior = false;
  sol.iterations = sol.phase1.iterations + sol.phase2.iterations;
  sol.restarts = sol.phase1.restarts + sol.phase2.restarts;
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
  return sol;
}

}  // namespace twlp
