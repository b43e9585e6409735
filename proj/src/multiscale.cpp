#include "twlp/multiscale.hpp"

#include <algorithm>
#include <cmath>

#include "twlp/errors.hpp"

namespace twlp {

namespace {

// distinct indices written during one update
struct Marks {
  std::vector<char> seen;
  long count = 0;
  explicit Marks(size_t n) : seen(n, 0) {}
  void touch(int i) {
    if (!seen[i]) {
      seen[i] = 1;
      ++count;
    }
  }
};

}  // namespace

MultiscaleState::MultiscaleState(const CenteringProblem& P, double lambda, double alpha, const std::vector<double>& x,
                                 const std::vector<double>& y, const std::vector<double>& x_bar,
                                 const std::vector<double>& s_bar, double t_bar)
    : P_(&P), lambda_(lambda), alpha_(alpha), x_bar_(x_bar), s_bar_(s_bar), t_bar_(t_bar) {
  const SparseMatrix& A = *P.A;
  const int n = A.cols();
  if (static_cast<int>(x.size()) != n || static_cast<int>(x_bar.size()) != n || static_cast<int>(s_bar.size()) != n ||
      static_cast<int>(y.size()) != A.rows())
    throw StructuralError("multiscale: length mismatch");
  H_ = barrier_hessian(*P.phi, x_bar_);  // throws DomainError off the domain
  L_ = CholeskyFactor::factorize(A, DiagonalBlockHessian::from_diagonal(H_), *P.T);
  x_hat_ = x;
  y_hat_ = y;
  s_hat_ = dual_slack(P, y);
  dmu_.resize(n);
  c_x_.resize(n);
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    double ch2;
    block_terms(i, ch2, dmu_[i]);
    c_x_[i] = dmu_[i] / std::sqrt(H_[i]);
    g[i] = dmu_[i] / H_[i];
  }
  recompute_alpha_bar();
  h_ = L_.solve_lower_dense(A.multiply(g));
  eps_x_.assign(A.rows(), 0.0);
  eps_s_.assign(A.rows(), 0.0);
}

void MultiscaleState::block_terms(int i, double& cosh2, double& dmu) const {
  const Barrier& phi = *P_->phi;
  const double w = phi.weight(i);
  const double mu = s_bar_[i] / t_bar_ + w * phi.gradient(i, x_bar_[i]);
  const double gamma = std::fabs(mu) / std::sqrt(phi.hessian(i, x_bar_[i]));
  const double a = lambda_ * gamma / w;
  const double ch = safe_cosh(a);
  cosh2 = ch * ch / w;
  // alpha_bar^1/2 * (-alpha c_i mu_i); the normalisation cancels
  dmu = -alpha_ * alpha_ * (a < 1e-8 ? lambda_ / w : safe_sinh(a) / gamma) * mu;
}

void MultiscaleState::recompute_alpha_bar() {
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(x_bar_.size()); ++i) {
    double ch2, dm;
    block_terms(i, ch2, dm);
    sum += ch2;
  }
  alpha_bar_ = alpha_ * alpha_ * sum;
}

void MultiscaleState::move() {
  const double r = 1.0 / std::sqrt(alpha_bar_);
  beta_x_ += r;
  beta_s_ += t_bar_ * r;
}

std::vector<double> MultiscaleState::path_solve(int v0, double beta, const std::vector<double>& eps) const {
  const std::vector<int> p = L_.path(v0);
  const int hgt = static_cast<int>(p.size());
  std::vector<double> z(static_cast<size_t>(hgt));
  for (int m = hgt - 1; m >= 0; --m) {
    const auto& c = L_.column(p[m]);
    double acc = beta * h_[p[m]] + eps[p[m]];
    for (int s = 1; s < hgt - m; ++s)
      if (c[s] != 0.0) acc -= c[s] * z[m + s];
    z[m] = acc / c[0];
  }
  return z;
}

double MultiscaleState::atp(int i, double beta, const std::vector<double>& eps) const {
  const SparseMatrix& A = *P_->A;
  auto rows = A.col_rows(i);
  if (rows.empty()) return 0.0;
  auto vals = A.col_vals(i);
  const int k = L_.low_of(std::vector<int>(rows.begin(), rows.end()));
  const std::vector<double> z = path_solve(k, beta, eps);
  double acc = 0.0;
  for (size_t t = 0; t < rows.size(); ++t) acc += vals[t] * z[L_.depth(k) - L_.depth(rows[t])];
  return acc;
}

MultiscaleState::Counts MultiscaleState::update(const std::vector<double>& x_bar_new,
                                                const std::vector<double>& s_bar_new) {
  std::vector<int> S;
  for (size_t i = 0; i < x_bar_.size(); ++i)
    if (x_bar_new[i] != x_bar_[i] || s_bar_new[i] != s_bar_[i]) S.push_back(static_cast<int>(i));
  std::vector<double> xs, ss;
  for (int i : S) {
    xs.push_back(x_bar_new[i]);
    ss.push_back(s_bar_new[i]);
  }
  return update_sparse(S, xs, ss);
}

MultiscaleState::Counts MultiscaleState::update_sparse(const std::vector<int>& S, const std::vector<double>& x_new,
                                                       const std::vector<double>& s_new) {
  const SparseMatrix& A = *P_->A;
  const Barrier& phi = *P_->phi;
  const int n = A.cols(), d = A.rows();
  for (size_t k = 0; k < S.size(); ++k)
    if (!phi.interior(S[k], x_new[k])) throw DomainError("x_bar[" + std::to_string(S[k]) + "] is not interior");

  Marks mx(n), mc(n), mex(d), mes(d), mh(d);
  for (size_t k = 0; k < S.size(); ++k) {
    const int i = S[k];
    if (x_new[k] == x_bar_[i] && s_new[k] == s_bar_[i]) continue;
    const double H0 = H_[i], dmu0 = dmu_[i];
    double ch0, ch1, dmu1, dm;
    block_terms(i, ch0, dm);
    const double xb0 = x_bar_[i], sb0 = s_bar_[i];
    x_bar_[i] = x_new[k];
    s_bar_[i] = s_new[k];
    block_terms(i, ch1, dmu1);
    const double H1 = phi.weight(i) * phi.hessian(i, x_bar_[i]);
    x_bar_[i] = xb0;
    s_bar_[i] = sb0;

    auto rows = A.col_rows(i);
    auto vals = A.col_vals(i);

    // x_hat absorbs the change of the block's own terms
    const double q = atp(i, beta_x_, eps_x_);
    x_hat_[i] += beta_x_ * (dmu0 / H0 - dmu1 / H1) - q * (1.0 / H0 - 1.0 / H1);
    mx.touch(i);

    // h <- L^-1 A H_new^-1 dbar_new with L fixed; eps takes the difference
    const double dg = dmu1 / H1 - dmu0 / H0;
    if (dg != 0.0 && !rows.empty()) {
      SparseVec g;
      g.idx.assign(rows.begin(), rows.end());
      for (double v : vals) g.val.push_back(v * dg);
      SparseVec dh = L_.solve_lower(g);
      for (size_t t = 0; t < dh.idx.size(); ++t) {
        const int j = dh.idx[t];
        h_[j] += dh.val[t];
        eps_x_[j] -= beta_x_ * dh.val[t];
        eps_s_[j] -= beta_s_ * dh.val[t];
        mh.touch(j);
        mex.touch(j);
        mes.touch(j);
      }
    }

    if (H1 != H0 && !rows.empty()) {
      // P = L^-T (beta h + eps) is invariant; read it on the block's path first
      const std::vector<int> pat(rows.begin(), rows.end());
      const int low = L_.low_of(pat);
      const std::vector<double> px = path_solve(low, beta_x_, eps_x_);
      const std::vector<double> ps = path_solve(low, beta_s_, eps_s_);
      Eigen::MatrixXd h0(1, 1), h1(1, 1);
      h0(0, 0) = H0;
      h1(0, 0) = H1;
      auto sum = L_.update_block(A, A.block_of(i), h0, h1, true);
      // L_new (h_new - h_old) = -(L_new - L_old) h_old, supported on the path
      std::vector<double> rr(static_cast<size_t>(L_.depth(low)), 0.0);
      for (size_t t = 0; t < sum.changed.size(); ++t) {
        const int j = sum.changed[t];
        const auto& cn = L_.column(j);
        const auto& co = sum.old_cols[t];
        const int off = L_.depth(low) - L_.depth(j);  // slot of j in the path vectors
        double ex = 0.0, es = 0.0;
        for (size_t s = 0; s < cn.size(); ++s) {
          const double dl = cn[s] - (s < co.size() ? co[s] : 0.0);
          if (dl == 0.0) continue;
          rr[off + s] -= dl * h_[j];
          ex += dl * px[off + s];
          es += dl * ps[off + s];
        }
        eps_x_[j] += ex;
        eps_s_[j] += es;
        mex.touch(j);
        mes.touch(j);
      }
      // the path runs upward, so positions are already ascending
      const std::vector<int> path = L_.path(low);
      SparseVec rs;
      for (size_t m = 0; m < path.size(); ++m)
        if (rr[m] != 0.0) {
          rs.idx.push_back(path[m]);
          rs.val.push_back(rr[m]);
        }
      SparseVec dh = L_.solve_lower(rs);
      for (size_t t = 0; t < dh.idx.size(); ++t) {
        const int j = dh.idx[t];
        h_[j] += dh.val[t];
        eps_x_[j] -= beta_x_ * dh.val[t];
        eps_s_[j] -= beta_s_ * dh.val[t];
        mh.touch(j);
        mex.touch(j);
        mes.touch(j);
      }
    }

    H_[i] = H1;
    dmu_[i] = dmu1;
    c_x_[i] = dmu1 / std::sqrt(H1);
    mc.touch(i);
    alpha_bar_ += alpha_ * alpha_ * (ch1 - ch0);
    x_bar_[i] = x_new[k];
    s_bar_[i] = s_new[k];
    if (++updates_ % 4096 == 0) recompute_alpha_bar();
  }
  Counts c;
  c.x_hat = mx.count;
  c.c_x = mc.count;
  c.eps_x = mex.count;
  c.eps_s = mes.count;
  c.coeffs = mh.count;
  return c;
}

void MultiscaleState::output(std::vector<double>& x, std::vector<double>& s) const {
  const SparseMatrix& A = *P_->A;
  const int n = A.cols(), d = A.rows();
  std::vector<double> v(d), u(d);
  for (int j = 0; j < d; ++j) {
    v[j] = beta_x_ * h_[j] + eps_x_[j];
    u[j] = beta_s_ * h_[j] + eps_s_[j];
  }
  const std::vector<double> ax = A.multiply_transpose(L_.solve_upper_dense(v));
  const std::vector<double> as = A.multiply_transpose(L_.solve_upper_dense(u));
  x.resize(n);
  s.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = x_hat_[i] + (beta_x_ * dmu_[i] - ax[i]) / H_[i];
    s[i] = s_hat_[i] + as[i];
  }
}

std::vector<double> MultiscaleState::output_y() const {
  const int d = P_->A->rows();
  std::vector<double> u(d);
  for (int j = 0; j < d; ++j) u[j] = beta_s_ * h_[j] + eps_s_[j];
  std::vector<double> p = L_.solve_upper_dense(u);
  for (int j = 0; j < d; ++j) p[j] = y_hat_[j] - p[j];
  return p;
}

std::pair<double, double> MultiscaleState::entry(int i) const {
  const double xi = x_hat_[i] + (beta_x_ * dmu_[i] - atp(i, beta_x_, eps_x_)) / H_[i];
  const double si = s_hat_[i] + atp(i, beta_s_, eps_s_);
  return {xi, si};
}

std::vector<double> MultiscaleState::scaled_x() const {
  std::vector<double> x, s;
  output(x, s);
  for (size_t i = 0; i < x.size(); ++i) x[i] *= std::sqrt(H_[i]);
  return x;
}

std::vector<double> MultiscaleState::scaled_s() const {
  std::vector<double> x, s;
  output(x, s);
  for (size_t i = 0; i < s.size(); ++i) s[i] /= std::sqrt(H_[i]);
  return s;
}

double MultiscaleState::scaled_x_entry(int i) const { return entry(i).first * std::sqrt(H_[i]); }
double MultiscaleState::scaled_s_entry(int i) const { return entry(i).second / std::sqrt(H_[i]); }

double MultiscaleState::invariant_error() const {
  const SparseMatrix& A = *P_->A;
  const int n = A.cols();
  double err = 0.0;
  double sum = 0.0, dscale = 0.0;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) dscale = std::max(dscale, std::fabs(dmu_[i]));
  for (int i = 0; i < n; ++i) {
    double ch2, dm;
    block_terms(i, ch2, dm);
    sum += ch2;
    err = std::max(err, std::fabs(dm - dmu_[i]) / std::max(dscale, 1e-300));
    const double hi = P_->phi->weight(i) * P_->phi->hessian(i, x_bar_[i]);
    err = std::max(err, std::fabs(hi - H_[i]) / hi);
    err = std::max(err, std::fabs(c_x_[i] - dmu_[i] / std::sqrt(H_[i])) / std::max(dscale / std::sqrt(H_[i]), 1e-300));
    g[i] = dmu_[i] / H_[i];
  }
  err = std::max(err, std::fabs(alpha_ * alpha_ * sum - alpha_bar_) / alpha_bar_);
  const std::vector<double> h = L_.solve_lower_dense(A.multiply(g));
  double hs = 0.0;
  for (double v : h) hs = std::max(hs, std::fabs(v));
  for (size_t j = 0; j < h.size(); ++j) err = std::max(err, std::fabs(h[j] - h_[j]) / std::max(hs, 1e-300));
  return err;
}

}  // namespace twlp
