#pragma once
// Independent reference computations used only by tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "twlp/cholesky.hpp"
#include "twlp/elim_tree.hpp"
#include "twlp/ipm.hpp"
#include "twlp/linf.hpp"
#include "twlp/lp.hpp"
#include "twlp/rng.hpp"
#include "twlp/sparse.hpp"

namespace oracle {

// Elimination game: fill graph under order pos[v], then the true
// elimination tree parent(v) = lowest-ordered higher neighbour.
inline std::vector<int> elimination_game_parent(const twlp::Graph& G, const std::vector<int>& pos) {
  const int n = G.n;
  std::vector<std::set<int>> adj(n);
  for (int u = 0; u < n; ++u) adj[u].insert(G.adj[u].begin(), G.adj[u].end());
  std::vector<int> by(n);
  for (int v = 0; v < n; ++v) by[pos[v]] = v;
  std::vector<int> parent(n, -1);
  std::vector<char> gone(n, 0);
  for (int k = 0; k < n; ++k) {
    int v = by[k];
    std::vector<int> hi;
    for (int u : adj[v])
      if (!gone[u]) hi.push_back(u);
    for (size_t a = 0; a < hi.size(); ++a)
      for (size_t b = a + 1; b < hi.size(); ++b) {
        adj[hi[a]].insert(hi[b]);
        adj[hi[b]].insert(hi[a]);
      }
    int best = -1;
    for (int u : hi)
      if (best < 0 || pos[u] < pos[best]) best = u;
    parent[v] = best;
    gone[v] = 1;
  }
  return parent;
}

inline bool parent_is_ancestor(const std::vector<int>& parent, int u, int v) {
  for (; v >= 0; v = parent[v])
    if (v == u) return true;
  return false;
}

inline Eigen::MatrixXd dense(const twlp::SparseMatrix& A) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (const auto& t : A.to_triplets()) M(t.row, t.col) = t.val;
  return M;
}

inline twlp::EliminationTree tree_from_parent(std::vector<int> parent) {
  std::vector<int> order(parent.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  return twlp::EliminationTree(std::move(parent), std::move(order));
}

// A generated instance in elimination order with a barrier, a strictly
// feasible x and a dual y; holds everything a CenteringProblem points to.
struct Setup {
  twlp::Instance inst;
  twlp::OrderedSystem sys;
  twlp::LogBarrier phi;
  twlp::CenteringProblem P;
  std::vector<double> x, y;
  double t = 1.0;

  Setup(twlp::InstanceKind kind, int size, unsigned long long seed, int width = 0)
      : inst(twlp::generate_instance(kind, size, seed, width)),
        sys(twlp::order_system(inst.lp.matrix(), inst.td)),
        phi(inst.lp.lower, inst.lp.upper) {
    P.A = &sys.A;
    P.T = &sys.T;
    P.c = inst.lp.c;
    P.phi = &phi;
    P.norm_A = sys.A.norm2_estimate();
    x = inst.interior;
    twlp::Rng rng(seed ^ 0x5eedULL);
    y.resize(static_cast<size_t>(sys.A.rows()));
    for (double& v : y) v = rng.uniform(-0.5, 0.5);
  }
  Setup(const Setup&) = delete;

  std::vector<double> s() const { return twlp::dual_slack(P, y); }
  // s with every coordinate exactly centred at t for the current x
  std::vector<double> centered_s(double tt) const {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = -tt * phi.gradient(static_cast<int>(i), x[i]);
    return out;
  }
};

// Explicit simulator of the robust step at a frozen (x_bar, s_bar, t_bar),
// dense linear algebra throughout.
struct NaiveStep {
  Eigen::MatrixXd A;
  const twlp::Barrier* phi;
  double lambda, alpha;

  // (dx, ds) of one move
  std::pair<Eigen::VectorXd, Eigen::VectorXd> step(const std::vector<double>& xb, const std::vector<double>& sb,
                                                   double tb) const {
    const int n = static_cast<int>(xb.size());
    Eigen::VectorXd H(n), mu(n), gam(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = phi->weight(i);
      H(i) = w * phi->hessian(i, xb[i]);
      mu(i) = sb[i] / tb + w * phi->gradient(i, xb[i]);
      gam(i) = std::abs(mu(i)) / std::sqrt(phi->hessian(i, xb[i]));
      const double ch = std::cosh(lambda * gam(i) / w);
      sum += ch * ch / w;
    }
    Eigen::VectorXd dmu(n);
    for (int i = 0; i < n; ++i) {
      const double w = phi->weight(i), a = lambda * gam(i) / w;
      const double ci = (a < 1e-8 ? lambda / w : std::sinh(a) / gam(i)) / std::sqrt(sum);
      dmu(i) = -alpha * ci * mu(i);
    }
    const Eigen::VectorXd Hi = H.cwiseInverse();
    const Eigen::MatrixXd M = A * Hi.asDiagonal() * A.transpose();
    const Eigen::VectorXd z = M.ldlt().solve(A * Hi.cwiseProduct(dmu));
    const Eigen::VectorXd atz = A.transpose() * z;
    return {Hi.cwiseProduct(dmu - atz), tb * atz};
  }
};


// A stored sequence y(0), y(1), ... served through the l-inf oracle interface,
// with node sketches precomputed per version.
struct Sequence {
  const twlp::SamplingTree* S;
  twlp::SketchMatrix Phi;
  std::vector<std::vector<double>> ys;
  std::vector<twlp::VectorSketch> sk;

  Sequence(const twlp::SamplingTree& tree, int r, uint64_t seed)
      : S(&tree), Phi(r, static_cast<int>(tree.leaf_of.size()), seed) {
    ys.reserve(4096);
    sk.reserve(4096);
  }
  void push(std::vector<double> y) {
    ys.push_back(std::move(y));
    sk.emplace_back(*S, Phi, ys.back());
  }
  twlp::VectorOracle oracle() {
    twlp::VectorOracle O;
    O.typeI = [this](int l, int v) { return sk.at(static_cast<size_t>(l)).query(v); };
    O.typeII = [this](int l, int i) { return ys.at(static_cast<size_t>(l))[static_cast<size_t>(i)]; };
    return O;
  }
};


// One synthetic run for the l-inf guarantee: each step moves `spread` random
// coordinates by a random vector of norm zeta.  True when |z(l) - y(l)|_inf
// <= eps at every step.
inline bool linf_run(int run, int n, int k, double eps, double zeta, double delta, long cap, int spread,
                     twlp::LinfStats* stats = nullptr) {
  auto tree = twlp::binary_sampling_tree(n);
  const int h = tree.height();
  const int r = static_cast<int>(std::ceil(4.0 * h * h * std::log(16.0 * n * k)));
  Sequence seq(tree, r, 7919 + static_cast<uint64_t>(run));
  twlp::Rng rng(static_cast<uint64_t>(run) * 31 + 1);
  std::vector<double> y(n);
  for (double& a : y) a = rng.normal();
  seq.push(y);
  for (int l = 1; l <= k; ++l) {
    std::vector<int> idx;
    std::vector<double> g;
    double norm = 0.0;
    for (int q = 0; q < spread; ++q) {
      idx.push_back(rng.below(n));
      g.push_back(rng.normal());
      norm += g.back() * g.back();
    }
    for (int q = 0; q < spread; ++q) y[idx[q]] += zeta * g[q] / std::sqrt(norm + 1e-300);
    seq.push(y);
  }
  twlp::LinfOptions o;
  o.k = k;
  o.eps_apx = eps;
  o.zeta = zeta;
  o.delta_apx = delta;
  o.exhaustive_fallback = false;
  o.max_samples = cap;
  o.seed = static_cast<uint64_t>(run) + 17;
  twlp::LinfState L(tree, seq.oracle(), seq.ys[0], o);
  bool ok = true;
  for (int l = 1; l <= k; ++l) {
    const auto& z = L.query();
    for (int i = 0; i < n; ++i) ok = ok && std::fabs(z[i] - seq.ys[l][i]) <= eps;
  }
  if (stats) *stats = L.stats();
  return ok;
}

}  // namespace oracle
