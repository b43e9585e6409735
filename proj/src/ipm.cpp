#include "twlp/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "twlp/errors.hpp"

namespace twlp {

namespace {
constexpr double kArgClamp = 700.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}
}  // namespace

double safe_cosh(double a) {
  double e = std::exp(std::min(std::fabs(a), kArgClamp));
  return 0.5 * (e + 1.0 / e);
}

double safe_sinh(double a) {
  double m = std::min(std::fabs(a), kArgClamp);
  double v = std::exp(m) * (1.0 - std::exp(-2.0 * m)) / 2.0;
  if (m < 1e-5) v = m + m * m * m / 6.0;  // cancellation near zero
  return a < 0 ? -v : v;
}

// ---------------------------------------------------------------- barriers

LogBarrier::LogBarrier(std::vector<double> lo, std::vector<double> hi, std::vector<double> w)
    : lo_(std::move(lo)), hi_(std::move(hi)), w_(std::move(w)) {
  if (lo_.size() != hi_.size()) throw StructuralError("barrier bound vectors differ in length");
  if (w_.empty()) w_.assign(lo_.size(), 1.0);
  if (w_.size() != lo_.size()) throw StructuralError("barrier weight vector has the wrong length");
  for (size_t i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || std::isnan(hi_[i])) throw ValueError("barrier bound is not finite");
    if (!(lo_[i] < hi_[i])) throw DomainError("empty interval at coordinate " + std::to_string(i));
    if (!(w_[i] >= 1.0)) throw ValueError("barrier weights must be >= 1");
  }
}

void LogBarrier::append(const LogBarrier& o) {
  lo_.insert(lo_.end(), o.lo_.begin(), o.lo_.end());
  hi_.insert(hi_.end(), o.hi_.begin(), o.hi_.end());
  w_.insert(w_.end(), o.w_.begin(), o.w_.end());
}

double LogBarrier::value(int i, double x) const {
  if (!interior(i, x)) throw DomainError("x[" + std::to_string(i) + "] is not interior");
  double v = -std::log(x - lo_[i]);
  if (hi_[i] < kInf) v -= std::log(hi_[i] - x);
  return v;
}

double LogBarrier::gradient(int i, double x) const {
  if (!interior(i, x)) throw DomainError("x[" + std::to_string(i) + "] is not interior");
  double g = -1.0 / (x - lo_[i]);
  if (hi_[i] < kInf) g += 1.0 / (hi_[i] - x);
  return g;
}

double LogBarrier::hessian(int i, double x) const {
  if (!interior(i, x)) throw DomainError("x[" + std::to_string(i) + "] is not interior");
  double a = 1.0 / (x - lo_[i]);
  double h = a * a;
  if (hi_[i] < kInf) {
    double b = 1.0 / (hi_[i] - x);
    h += b * b;
  }
  return h;
}

// ---------------------------------------------------------------- params

IpmParams IpmParams::for_barrier(const Barrier& phi) {
  IpmParams p;
  p.m = phi.size();
  double min_ratio = 1.0;
  for (int i = 0; i < p.m; ++i) {
    double w = phi.weight(i), nu = phi.nu(i);
    p.sum_w += w;
    p.kappa += w * nu;
    min_ratio = std::min(min_ratio, w / (w + nu));
  }
  p.lambda = 64.0 * std::log(256.0 * p.m * p.sum_w);
  p.eps_bar = 1.0 / (1440.0 * p.lambda);
  p.alpha = p.eps_bar / 2.0;
  p.eps_t = p.eps_bar / 4.0 * min_ratio;
  p.step_shrink = p.alpha / (64.0 * std::sqrt(p.kappa));
  return p;
}

long IpmParams::iteration_cap(double t0, double t1) const {
  if (!(t0 > t1)) return 100;
  return static_cast<long>(std::ceil(10.0 * std::sqrt(kappa) * std::log(t0 / t1))) + 100;
}

double initial_path_parameter(int n, double kappa, double L, double R, double r, double delta) {
  return std::ldexp(1.0, 16) * std::pow(n + kappa, 5) * (L * R / delta) * (R / r);
}

// ---------------------------------------------------------------- potential

GammaMu gamma_mu(const std::vector<double>& x, const std::vector<double>& s, double t, const Barrier& phi) {
  const int n = phi.size();
  if (static_cast<int>(x.size()) != n || static_cast<int>(s.size()) != n)
    throw StructuralError("gamma_mu: length mismatch");
  GammaMu r;
  r.mu.resize(n);
  r.gamma.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!phi.interior(i, x[i])) throw DomainError("x[" + std::to_string(i) + "] is not strictly interior");
    r.mu[i] = s[i] / t + phi.weight(i) * phi.gradient(i, x[i]);
    r.gamma[i] = std::fabs(r.mu[i]) / std::sqrt(phi.hessian(i, x[i]));
  }
  return r;
}

double potential(const std::vector<double>& gamma, double lambda, const Barrier& phi) {
  double v = 0.0;
  for (size_t i = 0; i < gamma.size(); ++i) v += safe_cosh(lambda * gamma[i] / phi.weight(static_cast<int>(i)));
  return v;
}

StepCoefficients step_coefficients(const std::vector<double>& gamma, double lambda, const Barrier& phi,
                                   double alpha) {
  const int n = static_cast<int>(gamma.size());
  StepCoefficients r;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    double ch = safe_cosh(lambda * gamma[j] / phi.weight(j));
    sum += ch * ch / phi.weight(j);
  }
  const double root = std::sqrt(sum);
  r.c.resize(n);
  for (int i = 0; i < n; ++i) {
    double w = phi.weight(i), a = lambda * gamma[i] / w;
    // sinh(a)/gamma -> lambda/w as gamma -> 0
    r.c[i] = (a < 1e-8 ? lambda / w : safe_sinh(a) / gamma[i]) / root;
  }
  r.alpha_bar = alpha * alpha * sum;
  return r;
}

// largest alpha c_i allowed by the practical rule; a block may overshoot its
// own center a little, which the alpha halving below keeps in check
constexpr double kPracticalOvershoot = 1.9;

double practical_alpha(const IpmParams& prm, const std::vector<double>& c) {
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, v);
  double a = std::sqrt(prm.sum_w) / 128.0;
  if (cmax > 0) a = std::min(a, kPracticalOvershoot / cmax);
  return std::max(a, prm.alpha);
}

// ---------------------------------------------------------------- linear algebra

std::vector<double> dual_slack(const CenteringProblem& P, const std::vector<double>& y) {
  std::vector<double> s = P.A->multiply_transpose(y);
  for (size_t i = 0; i < s.size(); ++i) s[i] = P.c[i] - s[i];
  return s;
}

std::vector<double> barrier_hessian(const Barrier& phi, const std::vector<double>& x) {
  std::vector<double> H(x.size());
  for (size_t i = 0; i < x.size(); ++i) H[i] = phi.weight(static_cast<int>(i)) * phi.hessian(static_cast<int>(i), x[i]);
  return H;
}

Direction newton_direction(const CenteringProblem& P, const std::vector<double>& H, const std::vector<double>& dmu,
                           const CholeskyFactor& L) {
  const SparseMatrix& A = *P.A;
  const int n = A.cols();
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = dmu[i] / H[i];
  const std::vector<double> r = A.multiply(q);
  auto normal_solve = [&](const std::vector<double>& rhs) {
    return L.solve_upper_dense(L.solve_lower_dense(rhs));
  };
  Direction d;
  d.z = normal_solve(r);
  std::vector<double> atz = A.multiply_transpose(d.z);
  d.dx.resize(n);
  for (int i = 0; i < n; ++i) d.dx[i] = (dmu[i] - atz[i]) / H[i];
  // refine on the computed dx itself: A H^-1 A^T gets badly conditioned near
  // the boundary and the first solve leaves dx visibly off the null space
  double best = kInf;
  for (int round = 0; round < 4; ++round) {
    std::vector<double> rho = A.multiply(d.dx);
    double rn = 0.0, xn = 0.0;
    for (double v : rho) rn += v * v;
    for (double v : d.dx) xn += v * v;
    if (rn <= 1e-36 * xn || rn >= 0.25 * best) break;
    best = rn;
    std::vector<double> w = normal_solve(rho);
    std::vector<double> atw = A.multiply_transpose(w);
    for (int i = 0; i < n; ++i) d.dx[i] -= atw[i] / H[i];
    for (size_t k = 0; k < w.size(); ++k) d.z[k] += w[k];
  }
  return d;
}

double shrink_search(const std::function<double(double)>& pot, double pot0, double target, double hmax) {
  // pot grows roughly exponentially in h, so solve log pot(h) = log target
  // by Illinois regula falsi
  double a = 0.0, b = hmax;
  double fa = std::log(pot0) - std::log(target), fb = std::log(pot(b)) - std::log(target);
  if (fb <= 0.0) return hmax;
  int side = 0;
  for (int it = 0; it < 40 && b - a > 1e-12 * b; ++it) {
    double m = (a * fb - b * fa) / (fb - fa);
    if (!(m > a && m < b)) m = 0.5 * (a + b);
    double fm = std::log(pot(m)) - std::log(target);
    if (fm <= 0.0) {
      a = m;
      fa = fm;
      if (fm > -2e-3) break;
      if (side == -1) fb /= 2.0;
      side = -1;
    } else {
      b = m;
      fb = fm;
      if (side == 1) fa /= 2.0;
      side = 1;
    }
  }
  return a;
}

// ---------------------------------------------------------------- exact engine

void ExactEngine::start(const CenteringProblem& P, const IpmParams& prm, const CenteringOptions& opt,
                        const PathPoint& p) {
  P_ = &P;
  prm_ = prm;
  opt_ = opt;
  pt_ = p;
  h_ = 0.0;
}

double ExactEngine::advance(double t, double t_end, CenteringStats& stats) {
  const CenteringProblem& P = *P_;
  const Barrier& phi = *P.phi;
  const int n = phi.size();
  std::vector<double>& x = pt_.x;
  std::vector<double>& y = pt_.y;

  const std::vector<double> s = dual_slack(P, y);
  const GammaMu gm = gamma_mu(x, s, t, phi);
  const double phi0 = potential(gm.gamma, prm_.lambda, phi);
  const StepCoefficients sc = step_coefficients(gm.gamma, prm_.lambda, phi, prm_.alpha);
  const bool theory = opt_.rule == StepRule::Theory;
  double alpha = theory ? prm_.alpha : practical_alpha(prm_, sc.c);

  // direction for alpha = 1; the step is linear in alpha
  std::vector<double> dmu(n);
  for (int i = 0; i < n; ++i) dmu[i] = -sc.c[i] * gm.mu[i];
  const std::vector<double> H = barrier_hessian(phi, x);
  const CholeskyFactor L = CholeskyFactor::factorize(*P.A, DiagonalBlockHessian::from_diagonal(H), *P.T);
  const Direction dir = newton_direction(P, H, dmu, L);
  const std::vector<double> atz = P.A->multiply_transpose(dir.z);

  std::vector<double> xn(n), yn(y.size()), sn(n);
  auto trial = [&](double a, double tn, double& phi_new) {
    for (int i = 0; i < n; ++i) {
      xn[i] = x[i] + a * dir.dx[i];
      if (!phi.interior(i, xn[i])) return false;
    }
    for (size_t k = 0; k < y.size(); ++k) yn[k] = y[k] - a * t * dir.z[k];
    for (int i = 0; i < n; ++i) sn[i] = s[i] + a * t * atz[i];
    phi_new = potential(gamma_mu(xn, sn, tn, phi).gamma, prm_.lambda, phi);
    return std::isfinite(phi_new);
  };
  const double hi = prm_.cosh_hi(), lo = prm_.cosh_lo();
  auto guards = [&](double phi_new) { return phi_new <= hi && (phi0 < lo || phi_new <= phi0); };

  double h = 0.0, phi1 = 0.0;
  if (theory) {
    h = prm_.step_shrink;
    double tn = std::max((1.0 - h) * t, t_end);
    if (!trial(alpha, tn, phi1) || !guards(phi1)) {
      ++stats.potential_violations;
      throw SolverError("potential blowup");
    }
  } else {
    // shrink alpha until the pure centering move keeps the guards
    for (;;) {
      if (trial(alpha, t, phi1) && guards(phi1)) break;
      if (alpha <= prm_.alpha) {
        ++stats.potential_violations;
        throw SolverError("potential blowup");
      }
      alpha = std::max(alpha / 2.0, prm_.alpha);
    }
    // phi(tn) for the fixed move, with the per-coordinate pieces cached
    std::vector<double> u(n), g(n), r(n);
    for (int i = 0; i < n; ++i) {
      u[i] = sn[i];
      g[i] = phi.weight(i) * phi.gradient(i, xn[i]);
      r[i] = prm_.lambda / (phi.weight(i) * std::sqrt(phi.hessian(i, xn[i])));
    }
    auto pot = [&](double hh) {
      const double tn = std::max((1.0 - hh) * t, t_end);
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += safe_cosh((u[i] / tn + g[i]) * r[i]);
      return v;
    };
    // below cosh(lambda/128) any value up to a fraction of cosh(lambda/64) is
    // allowed; above it the potential may not grow
    const double target = phi0 < lo ? std::max(lo, opt_.target * hi) : phi0;
    const double hmax = std::min(opt_.max_shrink, 1.0 - t_end / t);
    h = shrink_search(pot, phi1, target, hmax);
    phi1 = pot(h);
    h_ = h;
  }
  const double tn = std::max((1.0 - h) * t, t_end);

  // invariants of the accepted step
  double dxn = 0.0, dsn = 0.0, dxe = 0.0;
  for (int i = 0; i < n; ++i) {
    double dx = alpha * dir.dx[i], ds = alpha * t * atz[i];
    dxn += H[i] * dx * dx;
    dsn += ds * ds / H[i];
    dxe += dx * dx;
  }
  dxn = std::sqrt(dxn);
  dsn = std::sqrt(dsn);
  double proj = 0.0;
  if (dxe > 0) {
    std::vector<double> adx = P.A->multiply(dir.dx);
    proj = norm2(adx) / (P.norm_A * std::sqrt(dxe) / alpha);
  }
  if (opt_.check_invariants) {
    if (dxn > 1.125 * alpha * (1 + 1e-9) || dsn > 1.125 * alpha * t * (1 + 1e-9)) ++stats.step_violations;
    if (proj > 1e-9) ++stats.projection_violations;
    if (!guards(phi1)) ++stats.potential_violations;
  }
  stats.max_phi = std::max({stats.max_phi, phi0, phi1});
  if (stats.record_trace)
    stats.trace.push_back({tn, h, alpha, phi0, phi1, dxn, dsn, proj, false});

  x = xn;
  y = yn;
  pt_.t = tn;
  return tn;
}

// ---------------------------------------------------------------- centering

PathPoint centering(const CenteringProblem& P, const IpmParams& prm, const PathPoint& start, double t_end,
                    CenteringEngine& engine, const CenteringOptions& opt, CenteringStats& stats) {
  if (start.t <= t_end) {
    PathPoint p = start;
    return p;
  }
  long cap = opt.max_iterations;
  if (cap <= 0) {
    cap = prm.iteration_cap(start.t, t_end);
    // the practical rule takes t-steps of roughly 1/128 or more
    if (opt.rule == StepRule::Practical)
      cap = std::max(cap, static_cast<long>(std::ceil(512.0 * std::log(start.t / t_end))) + 1000);
  }
  engine.start(P, prm, opt, start);
  double t = start.t;
  while (t > t_end) {
    if (stats.iterations >= cap) throw SolverError("iteration cap exceeded");
    t = engine.advance(t, t_end, stats);
    ++stats.iterations;
  }
  PathPoint out = engine.point();
  out.t = t;
  return out;
}

// ---------------------------------------------------------------- initial point

std::vector<double> barrier_center(const std::vector<double>& c, double t, const Barrier& phi) {
  const int n = phi.size();
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    const auto* lb = dynamic_cast<const LogBarrier*>(&phi);
    double lo = lb ? lb->lo(i) : 0.0, hi = lb ? lb->hi(i) : kInf;
    double xi = hi < kInf ? 0.5 * (lo + hi) : lo + 1.0;
    const double w = phi.weight(i);
    bool ok = false;
    for (int it = 0; it < 64; ++it) {
      double g = c[i] / t + w * phi.gradient(i, xi);
      double hs = w * phi.hessian(i, xi);
      double dec = std::fabs(g) / std::sqrt(hs);
      if (dec <= 1e-12) {
        ok = true;
        break;
      }
      double step = -g / hs;
      if (dec > 0.25) step /= 1.0 + dec;
      xi += step;
    }
    if (!ok) {
      double g = c[i] / t + w * phi.gradient(i, xi);
      ok = std::fabs(g) / std::sqrt(w * phi.hessian(i, xi)) <= 1e-10;
    }
    if (!ok) throw SolverError("no interior point found");
    x[i] = xi;
  }
  return x;
}

ModifiedProgram build_initial_modified_program(const SparseMatrix& A, const EliminationTree& T,
                                               const std::vector<double>& b, const std::vector<double>& c,
                                               const LogBarrier& phi, const IpmParams& prm) {
  const int n = A.cols(), d = A.rows();
  const double t = prm.t_start;
  const double R = prm.outer_radius;
  ModifiedProgram M;
  M.t_start = t;
  M.x_c = barrier_center(c, t, phi);

  std::vector<double> r = A.multiply(M.x_c);
  for (int k = 0; k < d; ++k) r[k] = b[k] - r[k];
  CholeskyFactor L;
  try {
    L = CholeskyFactor::factorize(A, DiagonalBlockHessian(std::vector<int>(A.num_blocks(), 1)), T);
  } catch (const NumericalError&) {
    throw SolverError("A not full row rank");
  }
  std::vector<double> v = L.solve_upper_dense(L.solve_lower_dense(r));
  std::vector<double> atv = A.multiply_transpose(v);
  M.x_o.resize(n);
  for (int i = 0; i < n; ++i) M.x_o[i] = M.x_c[i] + atv[i];

  std::vector<double> x2(n);
  for (int i = 0; i < n; ++i) {
    x2[i] = 3.0 * R + M.x_o[i] - M.x_c[i];
    if (!(x2[i] > 0.0)) throw SolverError("no interior point found");
  }

  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(3 * A.nnz()));
  for (int j = 0; j < n; ++j) {
    auto rows = A.col_rows(j);
    auto vals = A.col_vals(j);
    for (size_t k = 0; k < rows.size(); ++k) {
      trip.push_back({rows[k], j, vals[k]});
      trip.push_back({rows[k], n + j, vals[k]});
      trip.push_back({rows[k], 2 * n + j, -vals[k]});
    }
  }
  M.A = build_csc(trip, d, 3 * n);

  M.phi = phi;
  LogBarrier half(std::vector<double>(n, 0.0), std::vector<double>(n, kInf));
  M.phi.append(half);
  M.phi.append(half);

  M.c.resize(3 * n);
  M.start.x.resize(3 * n);
  for (int i = 0; i < n; ++i) {
    M.c[i] = c[i];
    M.c[n + i] = t / x2[i];
    M.c[2 * n + i] = t / (3.0 * R);
    M.start.x[i] = M.x_c[i];
    M.start.x[n + i] = x2[i];
    M.start.x[2 * n + i] = 3.0 * R;
  }
  M.start.y.assign(d, 0.0);
  M.start.t = t;
  return M;
}

PathPoint extract_original_point(const PathPoint& p, int n, const Barrier& phi) {
  if (static_cast<int>(p.x.size()) != 3 * n) throw StructuralError("extract: expected a tripled point");
  PathPoint q;
  q.x.resize(n);
  for (int i = 0; i < n; ++i) {
    q.x[i] = p.x[i] + p.x[n + i] - p.x[2 * n + i];
    if (!phi.interior(i, q.x[i])) throw SolverError("initialization insufficient");
  }
  q.y = p.y;
  q.t = p.t;
  return q;
}

}  // namespace twlp
