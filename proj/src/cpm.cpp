#include "twlp/cpm.hpp"

#include <algorithm>
#include <cmath>

#include "twlp/rng.hpp"

namespace twlp {

namespace {

double potential_at(const std::vector<double>& x, const std::vector<double>& s, double t, double lambda,
                    const Barrier& phi) {
  return potential(gamma_mu(x, s, t, phi).gamma, lambda, phi);
}

}  // namespace

void MaintainedEngine::start(const CenteringProblem& P, const IpmParams& prm, const CenteringOptions& opt,
                             const PathPoint& p) {
  P_ = &P;
  prm_ = prm;
  copt_ = opt;
  n_ = P.A->cols();
  k_ = opt_.window > 0 ? opt_.window : std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_)))));
  tree_ = build_balanced_sampling_tree(*P.T, *P.A);
  const int r = opt_.sketch_dim > 0 ? opt_.sketch_dim : default_sketch_dim(opt_.total_steps, tree_.height(), n_, k_);
  Phi_ = SketchMatrix(r, n_, splitmix64(opt_.seed));
  windows_ = 0;
  alpha_ = 0.0;
  initialize(p.x, p.y, p.t);
}

void MaintainedEngine::initialize(const std::vector<double>& x, const std::vector<double>& y, double t) {
  const Barrier& phi = *P_->phi;
  const std::vector<double> s = dual_slack(*P_, y);
  if (alpha_ <= 0.0 || copt_.rule == StepRule::Theory) {
    const GammaMu gm = gamma_mu(x, s, t, phi);
    const StepCoefficients sc = step_coefficients(gm.gamma, prm_.lambda, phi, 1.0);
    alpha_ = copt_.rule == StepRule::Theory ? prm_.alpha : practical_alpha(prm_, sc.c);
  }
  t_bar_ = t;
  ms_ = std::make_unique<MultiscaleState>(*P_, prm_.lambda, alpha_, x, y, x, s, t);
  ++windows_;
  ell_ = 0;
  force_ = false;
  pending_ = false;
  have_out_ = false;
  u_stamp_x_ = u_stamp_s_ = -1;
  bs_.reset();

  LinfOptions ox;
  ox.k = k_;
  ox.C0 = opt_.C0;
  ox.exhaustive_fallback = opt_.exhaustive_fallback;
  ox.max_samples = opt_.max_samples;
  ox.delta_apx = std::min(0.5, static_cast<double>(k_) / (20.0 * static_cast<double>(std::max(opt_.total_steps, 1L))));
  LinfOptions os = ox;
  ox.eps_apx = prm_.eps_bar;
  ox.zeta = 2.0 * alpha_;
  ox.seed = splitmix64(opt_.seed * 2 + windows_);
  os.eps_apx = prm_.eps_bar * t / 2.0;
  os.zeta = 2.0 * alpha_ * t;
  os.seed = splitmix64(opt_.seed * 2 + 1 + (windows_ << 1));

  ms_->output(out_x_, out_s_);
  have_out_ = true;
  std::vector<double> tx = out_x_, ts = out_s_;
  const auto& H = ms_->hessian();
  for (int i = 0; i < n_; ++i) {
    tx[i] *= std::sqrt(H[i]);
    ts[i] /= std::sqrt(H[i]);
  }
  lx_ = std::make_unique<LinfState>(tree_, oracle_x(), tx, ox);
  ls_ = std::make_unique<LinfState>(tree_, oracle_s(), ts, os);
  sampling_ = !opt_.exhaustive_fallback || lx_->samples_for(0) < n_ || ls_->samples_for(0) < n_;
  snap_x_.clear();
  snap_s_.clear();
  if (sampling_) {
    build_sketches();
    snap_x_.push_back(std::move(tx));
    snap_s_.push_back(std::move(ts));
  }
}

void MaintainedEngine::build_sketches() {
  CholeskyFactor& L = ms_->factor();
  L.set_recording(true);
  L.clear_history();
  const auto& H = ms_->hessian();
  bs_ = std::make_unique<BalancedSketch>(tree_, Phi_, *P_->A, *P_->T, H, L);
  std::vector<double> xh(n_), sh(n_);
  for (int i = 0; i < n_; ++i) {
    xh[i] = ms_->x_hat()[i] * std::sqrt(H[i]);
    sh[i] = ms_->s_hat()[i] / std::sqrt(H[i]);
  }
  vs_xh_ = VectorSketch(tree_, Phi_, xh);
  vs_cx_ = VectorSketch(tree_, Phi_, ms_->c_x());
  vs_sh_ = VectorSketch(tree_, Phi_, sh);
  u_stamp_x_ = u_stamp_s_ = -1;
}

void MaintainedEngine::snapshot() {
  snap_x_.push_back(ms_->scaled_x());
  snap_s_.push_back(ms_->scaled_s());
}

void MaintainedEngine::apply_pending() {
  if (!pending_) return;
  pending_ = false;
  if (pend_S_.empty()) return;
  u_stamp_x_ = u_stamp_s_ = -1;
  if (4 * pend_S_.size() > static_cast<size_t>(n_)) {
    // most blocks changed: a fresh representation costs less than |S| updates
    std::vector<double> x, s;
    ms_->output(x, s);
    const std::vector<double> y = ms_->output_y();
    std::vector<double> xb = ms_->x_bar(), sb = ms_->s_bar();
    for (size_t q = 0; q < pend_S_.size(); ++q) {
      xb[pend_S_[q]] = pend_x_[q];
      sb[pend_S_[q]] = pend_s_[q];
    }
    ms_ = std::make_unique<MultiscaleState>(*P_, prm_.lambda, alpha_, x, y, xb, sb, t_bar_);
    if (sampling_) build_sketches();
    return;
  }
  ms_->update_sparse(pend_S_, pend_x_, pend_s_);
  if (!sampling_) return;
  const auto& H = ms_->hessian();
  for (int j : pend_S_) {
    bs_->update_h(j, H[j]);
    vs_xh_.update_entry(j, ms_->x_hat()[j] * std::sqrt(H[j]));
    vs_cx_.update_entry(j, ms_->c_x()[j]);
    vs_sh_.update_entry(j, ms_->s_hat()[j] / std::sqrt(H[j]));
  }
}

double MaintainedEngine::advance(double t, double t_end, CenteringStats& stats) {
  const Barrier& phi = *P_->phi;
  ++ell_;
  const bool restart = force_ || ell_ > k_ || std::fabs(t_bar_ - t) > t_bar_ * prm_.eps_t;
  std::vector<double> x0, y0;
  if (restart) {
    // the represented point does not depend on the pending x_bar, s_bar
    if (!have_out_) ms_->output(out_x_, out_s_);
    x0 = out_x_;
    y0 = ms_->output_y();
    if (copt_.rule == StepRule::Practical) alpha_ = 0.0;
    initialize(x0, y0, t);
    ell_ = 1;
    ++stats.restarts;
  } else {
    apply_pending();
  }

  const double hi = prm_.cosh_hi(), lo = prm_.cosh_lo();
  const double phi0 = potential_at(ms_->x_bar(), ms_->s_bar(), t, prm_.lambda, phi);
  std::vector<double> xb, sb;
  std::vector<int> S;
  double pot0 = 0.0;
  bool guard = false;
  for (;;) {
    ms_->move();
    have_out_ = false;
    u_stamp_x_ = u_stamp_s_ = -1;
    if (sampling_) snapshot();
    const std::vector<double>& zx = lx_->query();
    const std::vector<double>& zs = ls_->query();
    S = lx_->last_changed();
    S.insert(S.end(), ls_->last_changed().begin(), ls_->last_changed().end());
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    xb = ms_->x_bar();
    sb = ms_->s_bar();
    const auto& H = ms_->hessian();
    for (int i : S) {
      xb[i] = zx[i] / std::sqrt(H[i]);
      sb[i] = zs[i] * std::sqrt(H[i]);
    }
    pot0 = potential_at(xb, sb, t, prm_.lambda, phi);
    guard = std::isfinite(pot0) && pot0 <= hi && (phi0 < lo || pot0 <= phi0);
    // a fresh window may retry with a smaller alpha, as the exact engine does
    if (guard || !restart || copt_.rule == StepRule::Theory || alpha_ <= prm_.alpha) break;
    alpha_ = std::max(alpha_ / 2.0, prm_.alpha);
    initialize(x0, y0, t);
    ell_ = 1;
  }
  if (copt_.check_invariants && !guard) ++stats.potential_violations;

  pending_ = true;
  pend_S_ = S;
  pend_x_.clear();
  pend_s_.clear();
  for (int i : S) {
    pend_x_.push_back(xb[i]);
    pend_s_.push_back(sb[i]);
  }

  if (opt_.debug) {
    // dense reconstruction against the approximate point
    if (!have_out_) ms_->output(out_x_, out_s_);
    have_out_ = true;
    const auto& H = ms_->hessian();
    for (int i = 0; i < n_; ++i) {
      const double ex = std::sqrt(H[i]) * std::fabs(xb[i] - out_x_[i]);
      const double es = std::fabs(sb[i] - out_s_[i]) / std::sqrt(H[i]);
      if (ex > prm_.eps_bar * (1 + 1e-9) + 1e-14 || es > t_bar_ * prm_.eps_bar * phi.weight(i) * (1 + 1e-9) + 1e-14)
        ++stats.approx_violations;
    }
  }

  double h = 0.0;
  if (copt_.rule == StepRule::Theory) {
    h = prm_.step_shrink;
  } else if (guard) {
    std::vector<double> g(n_), r(n_);
    for (int i = 0; i < n_; ++i) {
      g[i] = phi.weight(i) * phi.gradient(i, xb[i]);
      r[i] = prm_.lambda / (phi.weight(i) * std::sqrt(phi.hessian(i, xb[i])));
    }
    auto pot = [&](double hh) {
      const double tn = std::max((1.0 - hh) * t, t_end);
      double v = 0.0;
      for (int i = 0; i < n_; ++i) v += safe_cosh((sb[i] / tn + g[i]) * r[i]);
      return v;
    };
    const double target = phi0 < lo ? std::max(lo, copt_.target * hi) : phi0;
    const double hmax = std::min(copt_.max_shrink, 1.0 - t_end / t);
    if (pot0 <= target && hmax > 0.0) h = shrink_search(pot, pot0, target, hmax);
  }
  const double tn = std::max((1.0 - h) * t, t_end);
  stats.max_phi = std::max({stats.max_phi, phi0, pot0});
  if (stats.record_trace) stats.trace.push_back({tn, h, alpha_, phi0, pot0, 0.0, 0.0, 0.0, restart});
  return tn;
}

PathPoint MaintainedEngine::point() {
  PathPoint p;
  if (!have_out_) ms_->output(out_x_, out_s_);
  have_out_ = true;
  p.x = out_x_;
  p.y = ms_->output_y();
  p.t = t_bar_;
  return p;
}

// ---------------------------------------------------------------- oracles

std::vector<double> MaintainedEngine::sketch_of(const std::vector<double>& v, int node) const {
  std::vector<double> y(static_cast<size_t>(Phi_.rows()), 0.0);
  for (int j : tree_.nodes[node].chi) Phi_.add_column(j, v[j], y);
  return y;
}

const std::vector<double>& MaintainedEngine::coefficient_vector(bool xside) {
  std::vector<double>& u = xside ? ux_ : us_;
  int& stamp = xside ? u_stamp_x_ : u_stamp_s_;
  if (stamp != ell_) {
    const double beta = xside ? ms_->beta_x() : ms_->beta_s();
    const auto& h = ms_->coeffs();
    const auto& e = xside ? ms_->eps_x() : ms_->eps_s();
    u.resize(h.size());
    for (size_t q = 0; q < h.size(); ++q) u[q] = beta * h[q] + e[q];
    stamp = ell_;
  }
  return u;
}

std::vector<double> MaintainedEngine::type1(bool xside, int version, int node) {
  if (version > ell_) throw SolverError("oracle read of a future version");
  if (version < ell_) return sketch_of(xside ? snap_x_.at(version) : snap_s_.at(version), node);
  if (!sampling_) return sketch_of(xside ? ms_->scaled_x() : ms_->scaled_s(), node);
  const std::vector<double>& u = coefficient_vector(xside);
  std::vector<double> w = bs_->query(node, u);
  if (xside) {
    const auto& a = vs_xh_.query(node);
    const auto& b = vs_cx_.query(node);
    const double beta = ms_->beta_x();
    for (size_t q = 0; q < w.size(); ++q) w[q] = a[q] + beta * b[q] - w[q];
  } else {
    const auto& a = vs_sh_.query(node);
    for (size_t q = 0; q < w.size(); ++q) w[q] += a[q];
  }
  return w;
}

double MaintainedEngine::type2(bool xside, int version, int i) {
  if (version > ell_) throw SolverError("oracle read of a future version");
  if (version < ell_) return (xside ? snap_x_ : snap_s_).at(version).at(i);
  return xside ? ms_->scaled_x_entry(i) : ms_->scaled_s_entry(i);
}

VectorOracle MaintainedEngine::oracle_x() {
  VectorOracle O;
  O.typeI = [this](int l, int v) { return type1(true, l, v); };
  O.typeII = [this](int l, int i) { return type2(true, l, i); };
  O.full = [this](int l) {
    if (l != ell_) throw SolverError("full read of an old version");
    if (!have_out_) ms_->output(out_x_, out_s_);
    have_out_ = true;
    std::vector<double> v = out_x_;
    for (int i = 0; i < n_; ++i) v[i] *= std::sqrt(ms_->hessian()[i]);
    return v;
  };
  return O;
}

VectorOracle MaintainedEngine::oracle_s() {
  VectorOracle O;
  O.typeI = [this](int l, int v) { return type1(false, l, v); };
  O.typeII = [this](int l, int i) { return type2(false, l, i); };
  O.full = [this](int l) {
    if (l != ell_) throw SolverError("full read of an old version");
    if (!have_out_) ms_->output(out_x_, out_s_);
    have_out_ = true;
    std::vector<double> v = out_s_;
    for (int i = 0; i < n_; ++i) v[i] /= std::sqrt(ms_->hessian()[i]);
    return v;
  };
  return O;
}

}  // namespace twlp
