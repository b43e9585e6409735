#pragma once

#include <cstdint>
#include <vector>

#include "twlp/cholesky.hpp"
#include "twlp/ipm.hpp"

namespace twlp {

// Implicit primal-dual pair
//   x = x_hat + H^-1/2 (beta_x c_x - W^T (beta_x h + eps_x))
//   s = s_hat + H^1/2 W^T (beta_s h + eps_s)
// with W = L^-1 A H^-1/2, c_x = H^-1/2 dbar_mu and h = L^-1 A H^-1 dbar_mu,
// all taken at the approximate point (x_bar, s_bar, t_bar).  Every block is
// a scalar (LP case).  y_hat tracks the dual so that s = c - A^T y with
// y = y_hat - L^-T (beta_s h + eps_s).
class MultiscaleState {
 public:
  struct Counts {
    long x_hat = 0, s_hat = 0, c_x = 0, eps_x = 0, eps_s = 0, coeffs = 0;
    long total() const { return x_hat + s_hat + c_x + eps_x + eps_s + coeffs; }
  };

  MultiscaleState() = default;
  // x, s the represented point; y with s = c - A^T y.  The Cholesky factor is
  // built here.  Throws DomainError when x_bar is not interior.
  MultiscaleState(const CenteringProblem& P, double lambda, double alpha, const std::vector<double>& x,
                  const std::vector<double>& y, const std::vector<double>& x_bar, const std::vector<double>& s_bar,
                  double t_bar);

  void move();
  // Replaces x_bar, s_bar on the coordinates where they differ; the
  // represented (x, s) does not change.
  Counts update(const std::vector<double>& x_bar_new, const std::vector<double>& s_bar_new);
  // same, for an explicit list of changed coordinates with their new values
  Counts update_sparse(const std::vector<int>& S, const std::vector<double>& x_new, const std::vector<double>& s_new);

  void output(std::vector<double>& x, std::vector<double>& s) const;
  std::vector<double> output_y() const;
  // (x_i, s_i) from O(height^2) data
  std::pair<double, double> entry(int i) const;

  // H^1/2 x and H^-1/2 s, the two vectors the l-inf structures track
  std::vector<double> scaled_x() const;
  std::vector<double> scaled_s() const;
  double scaled_x_entry(int i) const;
  double scaled_s_entry(int i) const;

  // accessors, mostly for tests
  const std::vector<double>& x_bar() const { return x_bar_; }
  const std::vector<double>& s_bar() const { return s_bar_; }
  double t_bar() const { return t_bar_; }
  double alpha() const { return alpha_; }
  double alpha_bar() const { return alpha_bar_; }
  double beta_x() const { return beta_x_; }
  double beta_s() const { return beta_s_; }
  const std::vector<double>& coeffs() const { return h_; }
  const std::vector<double>& dbar_mu() const { return dmu_; }
  const std::vector<double>& c_x() const { return c_x_; }
  const std::vector<double>& eps_x() const { return eps_x_; }
  const std::vector<double>& eps_s() const { return eps_s_; }
  const std::vector<double>& x_hat() const { return x_hat_; }
  const std::vector<double>& s_hat() const { return s_hat_; }
  const std::vector<double>& hessian() const { return H_; }
  const CholeskyFactor& factor() const { return L_; }
  CholeskyFactor& factor() { return L_; }
  const CenteringProblem& problem() const { return *P_; }
  long updates() const { return updates_; }

  // Max violation of the four representation invariants, by recomputation.
  double invariant_error() const;

 private:
  void block_terms(int i, double& cosh2, double& dmu) const;
  // L^-T v restricted to the root path of v0, v = beta h + eps read lazily
  std::vector<double> path_solve(int v0, double beta, const std::vector<double>& eps) const;
  double atp(int i, double beta, const std::vector<double>& eps) const;
  void recompute_alpha_bar();

  const CenteringProblem* P_ = nullptr;
  double lambda_ = 0.0, alpha_ = 0.0;
  std::vector<double> x_bar_, s_bar_;
  double t_bar_ = 0.0;
  std::vector<double> H_;
  CholeskyFactor L_;
  std::vector<double> x_hat_, s_hat_, y_hat_, c_x_, dmu_, h_, eps_x_, eps_s_;
  double beta_x_ = 0.0, beta_s_ = 0.0, alpha_bar_ = 0.0;
  long updates_ = 0;
};

}  // namespace twlp
