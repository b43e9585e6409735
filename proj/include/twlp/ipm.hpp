#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "twlp/cholesky.hpp"
#include "twlp/elim_tree.hpp"
#include "twlp/sparse.hpp"

namespace twlp {

// cosh/sinh that saturate instead of overflowing
double safe_cosh(double a);
double safe_sinh(double a);

// Scalar self-concordant barriers, one per coordinate.  The solver only uses
// interval and half-line log barriers; other convex blocks would implement
// this interface.
class Barrier {
 public:
  virtual ~Barrier() = default;
  virtual int size() const = 0;
  virtual double nu(int i) const = 0;
  virtual double weight(int i) const = 0;
  virtual bool interior(int i, double x) const = 0;
  virtual double value(int i, double x) const = 0;
  virtual double gradient(int i, double x) const = 0;
  virtual double hessian(int i, double x) const = 0;
};

// phi_i(x) = -log(hi - x) - log(x - lo); hi = +inf drops the first term.
class LogBarrier final : public Barrier {
 public:
  LogBarrier() = default;
  LogBarrier(std::vector<double> lo, std::vector<double> hi, std::vector<double> w = {});

  int size() const override { return static_cast<int>(lo_.size()); }
  double nu(int) const override { return 1.0; }
  double weight(int i) const override { return w_[i]; }
  bool interior(int i, double x) const override { return x > lo_[i] && x < hi_[i]; }
  double value(int i, double x) const override;
  double gradient(int i, double x) const override;
  double hessian(int i, double x) const override;

  double lo(int i) const { return lo_[i]; }
  double hi(int i) const { return hi_[i]; }
  // concatenation, used for the tripled program
  void append(const LogBarrier& other);

 private:
  std::vector<double> lo_, hi_, w_;
};

struct IpmParams {
  int m = 0;
  double sum_w = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double eps_bar = 0.0;
  double alpha = 0.0;
  double eps_t = 0.0;
  double step_shrink = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  double lipschitz = 0.0;
  double delta_init = 1.0 / 128.0;

  // lambda, eps_bar, alpha, eps_t and step_shrink from the barrier set
  static IpmParams for_barrier(const Barrier& phi);
  double cosh_hi() const { return safe_cosh(lambda / 64.0); }
  double cosh_lo() const { return safe_cosh(lambda / 128.0); }
  // 10 sqrt(kappa) log(t0/t1) + 100
  long iteration_cap(double t0, double t1) const;
};

// Starting path parameter 2^16 (n+kappa)^5 (LR/delta)(R/r).
double initial_path_parameter(int n, double kappa, double L, double R, double r, double delta = 1.0 / 128.0);

struct GammaMu {
  std::vector<double> mu, gamma;
};

// mu_i = s_i/t + w_i phi_i'(x_i), gamma_i = |mu_i| / sqrt(phi_i''(x_i)).
// Throws DomainError when some x_i is not strictly interior.
GammaMu gamma_mu(const std::vector<double>& x, const std::vector<double>& s, double t, const Barrier& phi);

double potential(const std::vector<double>& gamma, double lambda, const Barrier& phi);

struct StepCoefficients {
  std::vector<double> c;
  double alpha_bar = 0.0;  // alpha^2 sum_j w_j^-1 cosh^2(lambda gamma_j / w_j)
};
StepCoefficients step_coefficients(const std::vector<double>& gamma, double lambda, const Barrier& phi, double alpha);

// How alpha and the t-step are chosen inside centering.
//   Theory: alpha and step_shrink exactly as computed in IpmParams.
//   Practical: alpha is the largest value <= sqrt(sum w)/128 for which no
//   block's correction overshoots (alpha c_i <= 1), and the t-step is chosen
//   adaptively so the potential guards hold.
enum class StepRule { Theory, Practical };

struct CenteringOptions {
  StepRule rule = StepRule::Practical;
  long max_iterations = 0;  // 0: derived from the rule
  bool check_invariants = true;
  double target = 0.25;  // practical rule: fraction of cosh(lambda/64) aimed for
  double max_shrink = 0.25;
};

struct IterationRecord {
  double t = 0.0, h = 0.0, alpha = 0.0;
  double phi_before = 0.0, phi_after = 0.0;
  double dx_norm = 0.0, ds_norm = 0.0;  // local norms of the step
  double proj_residual = 0.0;           // |A dx| / (|A| |dx|)
  bool restarted = false;
};

struct CenteringStats {
  long iterations = 0;
  long restarts = 0;
  long potential_violations = 0;  // guard failures observed (exact mode asserts zero)
  long step_violations = 0;
  long projection_violations = 0;
  long approx_violations = 0;  // maintained debug mode: |x_bar - x|, |s_bar - s| over bound
  double max_phi = 0.0;
  std::vector<IterationRecord> trace;  // filled when record_trace is set
  bool record_trace = false;
};

// Linear program in the form the path follower sees: rows already in
// elimination order, one scalar barrier per column, s = c - A^T y.
struct CenteringProblem {
  const SparseMatrix* A = nullptr;
  const EliminationTree* T = nullptr;
  std::vector<double> c;
  const Barrier* phi = nullptr;
  double norm_A = 0.0;
};

struct PathPoint {
  std::vector<double> x;
  std::vector<double> y;  // s = c - A^T y
  double t = 0.0;
};

std::vector<double> dual_slack(const CenteringProblem& P, const std::vector<double>& y);

class CenteringEngine {
 public:
  virtual ~CenteringEngine() = default;
  virtual std::string name() const = 0;
  virtual void start(const CenteringProblem& P, const IpmParams& prm, const CenteringOptions& opt,
                     const PathPoint& p) = 0;
  // One robust step from the current t towards t_end.  Returns the new t.
  virtual double advance(double t, double t_end, CenteringStats& stats) = 0;
  virtual PathPoint point() = 0;
};

// x, s recomputed exactly every step: x_bar = x, s_bar = s, t_bar = t.
class ExactEngine final : public CenteringEngine {
 public:
  std::string name() const override { return "exact"; }
  void start(const CenteringProblem& P, const IpmParams& prm, const CenteringOptions& opt,
             const PathPoint& p) override;
  double advance(double t, double t_end, CenteringStats& stats) override;
  PathPoint point() override { return pt_; }

 private:
  const CenteringProblem* P_ = nullptr;
  IpmParams prm_;
  CenteringOptions opt_;
  PathPoint pt_;
  double h_ = 0.0;
};

// Newton direction for fixed (x_bar, s_bar, t_bar) and delta_mu:
//   dx = H^-1 (dmu - A^T z),  ds = t_bar A^T z,  z = (A H^-1 A^T)^-1 A H^-1 dmu.
struct Direction {
  std::vector<double> dx, z;  // y moves by -t_bar z
};
Direction newton_direction(const CenteringProblem& P, const std::vector<double>& H, const std::vector<double>& dmu,
                           const CholeskyFactor& L);
std::vector<double> barrier_hessian(const Barrier& phi, const std::vector<double>& x);

// Practical alpha: min(sqrt(sum w)/128, 1/max c_i), never below theory alpha.
double practical_alpha(const IpmParams& prm, const std::vector<double>& c);

// Largest h in [0, hmax] with pot(h) <= target (to 0.2% in log pot), given
// pot(0) = pot0 <= target.
double shrink_search(const std::function<double(double)>& pot, double pot0, double target, double hmax);

PathPoint centering(const CenteringProblem& P, const IpmParams& prm, const PathPoint& start, double t_end,
                    CenteringEngine& engine, const CenteringOptions& opt, CenteringStats& stats);

// x_c = argmin c^T x + t phi(x) coordinatewise by damped Newton.
std::vector<double> barrier_center(const std::vector<double>& c, double t, const Barrier& phi);

struct ModifiedProgram {
  SparseMatrix A;  // [A, A, -A], rows in elimination order
  LogBarrier phi;
  std::vector<double> c;
  PathPoint start;  // x0 and y = 0 at t_start
  std::vector<double> x_c, x_o;
  double t_start = 0.0;
};

// Rows of A must already be in elimination order of T.
ModifiedProgram build_initial_modified_program(const SparseMatrix& A, const EliminationTree& T,
                                               const std::vector<double>& b, const std::vector<double>& c,
                                               const LogBarrier& phi, const IpmParams& prm);

// x = x1 + x2 - x3, y unchanged (so s = s1).  Throws SolverError when x leaves the domain.
PathPoint extract_original_point(const PathPoint& p, int n, const Barrier& phi);

enum class SolveMode { Exact, Maintained };

struct SolveOptions {
  SolveMode mode = SolveMode::Exact;
  double eps = 1e-6;
  double inner_radius = 0.0;  // 0: 1e-3 min(u - l)
  unsigned long long seed = 1;
  int window = 0;  // maintained mode restart budget, 0: ceil(sqrt(n))
  CenteringOptions centering;
  bool record_trace = false;
  bool debug = false;  // maintained mode: dense reconstruction each step
};

struct Solution {
  std::vector<double> x, s;
  double objective = 0.0;
  long iterations = 0;
  long restarts = 0;
  double residual = 0.0;
  bool interior = false;
  double lipschitz = 0.0, outer_radius = 0.0;
  double t_end = 0.0;
  SolveMode mode = SolveMode::Exact;
  double seconds = 0.0;
  CenteringStats phase1, phase2;
};

std::unique_ptr<CenteringEngine> make_engine(const SolveOptions& opt);

// min c^T x s.t. Ax = b, lo <= x <= hi, rows of A in original order.
Solution solve(const SparseMatrix& A, const std::vector<double>& b, const std::vector<double>& c,
               const std::vector<double>& lo, const std::vector<double>& hi, const TreeDecomposition& td,
               const SolveOptions& opt);

}  // namespace twlp
