#include "twlp/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twlp/errors.hpp"

namespace twlp {

DiagonalBlockHessian::DiagonalBlockHessian(const std::vector<int>& block_sizes) {
  int off = 0;
  for (int s : block_sizes) {
    if (s <= 0) throw StructuralError("block size must be positive");
    start_.push_back(dim_);
    off_.push_back(off);
    size_.push_back(s);
    dim_ += s;
    off += s * s;
  }
  h_.assign(static_cast<size_t>(off), 0.0);
  for (int i = 0; i < num_blocks(); ++i)
    for (int k = 0; k < size_[i]; ++k) h_[off_[i] + k * size_[i] + k] = 1.0;
  inv_ = sq_ = isq_ = h_;
}

DiagonalBlockHessian DiagonalBlockHessian::from_diagonal(const std::vector<double>& diag) {
  DiagonalBlockHessian H(std::vector<int>(diag.size(), 1));
  for (size_t i = 0; i < diag.size(); ++i) H.set_scalar(static_cast<int>(i), diag[i]);
  return H;
}

void DiagonalBlockHessian::set_scalar(int i, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValueError("Hessian block " + std::to_string(i) + " is not positive");
  if (size_[i] != 1) throw StructuralError("set_scalar on a block of size " + std::to_string(size_[i]));
  size_t o = static_cast<size_t>(off_[i]);
  double r = std::sqrt(h);
  h_[o] = h;
  inv_[o] = 1.0 / h;
  sq_[o] = r;
  isq_[o] = 1.0 / r;
}

void DiagonalBlockHessian::set_block(int i, const Eigen::MatrixXd& Hi) {
  const int s = size_[i];
  if (Hi.rows() != s || Hi.cols() != s) throw StructuralError("Hessian block has the wrong shape");
  if (s == 1) return set_scalar(i, Hi(0, 0));
  if (!Hi.allFinite() || (Hi - Hi.transpose()).norm() > 1e-12 * (1.0 + Hi.norm()))
    throw ValueError("Hessian block " + std::to_string(i) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hi);
  const auto& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw ValueError("Hessian block " + std::to_string(i) + " is not positive definite");
  const auto& Q = es.eigenvectors();
  Eigen::MatrixXd inv = Q * ev.cwiseInverse().asDiagonal() * Q.transpose();
  Eigen::MatrixXd sq = Q * ev.cwiseSqrt().asDiagonal() * Q.transpose();
  Eigen::MatrixXd isq = Q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();
  auto put = [&](std::vector<double>& dst, const Eigen::MatrixXd& m) {
    Eigen::Map<Eigen::MatrixXd>(dst.data() + off_[i], s, s) = m;
  };
  put(h_, Hi);
  put(inv_, inv);
  put(sq_, sq);
  put(isq_, isq);
}

std::vector<double> DiagonalBlockHessian::mul(const std::vector<double>& m, const std::vector<double>& x) const {
  std::vector<double> y(x.size(), 0.0);
  for (int i = 0; i < num_blocks(); ++i) {
    const int s = size_[i], b = start_[i];
    if (s == 1) {
      y[b] = m[off_[i]] * x[b];
      continue;
    }
    Eigen::Map<const Eigen::MatrixXd> M(m.data() + off_[i], s, s);
    Eigen::Map<const Eigen::VectorXd> xv(x.data() + b, s);
    Eigen::Map<Eigen::VectorXd>(y.data() + b, s) = M * xv;
  }
  return y;
}

namespace {

// dense K = A_b H_b^{-1} A_b^T over the block pattern
Eigen::MatrixXd block_normal(const SparseMatrix& A, const DiagonalBlockHessian& H, int b) {
  const auto& p = A.block_pattern(b);
  const int q = static_cast<int>(p.size()), nb = A.block_size(b);
  Eigen::MatrixXd Ab = Eigen::MatrixXd::Zero(q, nb);
  for (int k = 0; k < nb; ++k) {
    int j = A.block_begin(b) + k;
    auto rows = A.col_rows(j);
    auto vals = A.col_vals(j);
    for (size_t t = 0; t < rows.size(); ++t)
      Ab(std::lower_bound(p.begin(), p.end(), rows[t]) - p.begin(), k) = vals[t];
  }
  return Ab * H.inverse(b) * Ab.transpose();
}

thread_local std::vector<double> scratch;

}  // namespace

std::vector<Triplet> normal_matrix_lower(const SparseMatrix& A, const DiagonalBlockHessian& H) {
  std::vector<Triplet> t;
  for (int b = 0; b < A.num_blocks(); ++b) {
    const auto& p = A.block_pattern(b);
    Eigen::MatrixXd K = block_normal(A, H, b);
    for (size_t r = 0; r < p.size(); ++r)
      for (size_t c = 0; c <= r; ++c) t.push_back({p[r], p[c], K(r, c)});
  }
  return t;
}

std::vector<int> CholeskyFactor::path(int v) const {
  std::vector<int> p;
  for (; v >= 0; v = parent_[v]) p.push_back(v);
  return p;
}

int CholeskyFactor::low_of(const std::vector<int>& pattern) const {
  if (pattern.empty()) throw StructuralError("low of an empty pattern");
  int best = pattern[0];
  for (int v : pattern) {
    if (v < 0 || v >= dim()) throw StructuralError("row index out of range");
    if (depth_[v] > depth_[best]) best = v;
  }
  for (int v : pattern) {
    int u = best;
    for (int k = depth_[best] - depth_[v]; k > 0; --k) u = parent_[u];
    if (u != v) throw StructuralError("pattern does not lie on one root path (rows " + std::to_string(v) + ", " +
                                      std::to_string(best) + ")");
  }
  return best;
}

CholeskyFactor CholeskyFactor::factorize(const SparseMatrix& A, const DiagonalBlockHessian& H,
                                         const EliminationTree& T) {
  const int d = A.rows();
  if (T.size() != d) throw StructuralError("tree size does not match the row count");
  if (H.dim() != A.cols() || H.num_blocks() != A.num_blocks()) throw StructuralError("Hessian blocks do not match A");
  CholeskyFactor F;
  F.parent_ = T.parents();
  F.depth_.resize(static_cast<size_t>(d));
  for (int v = 0; v < d; ++v) {
    if (F.parent_[v] >= 0 && F.parent_[v] <= v)
      throw StructuralError("tree is not labelled in elimination order at vertex " + std::to_string(v));
    F.depth_[v] = T.depth(v);
  }
  F.height_ = T.height();
  F.col_.resize(static_cast<size_t>(d));
  for (int v = 0; v < d; ++v) F.col_[v].assign(static_cast<size_t>(F.depth_[v]), 0.0);
  F.since_.assign(static_cast<size_t>(d), 0);
  F.history_.assign(static_cast<size_t>(d), {});

  for (int b = 0; b < A.num_blocks(); ++b) {
    const auto& p = A.block_pattern(b);
    if (p.empty()) continue;
    F.low_of(p);
    if (A.block_size(b) == 1) {
      // scalar block: K = a a^T / h without a dense temporary
      const int j = A.block_begin(b);
      auto rows = A.col_rows(j);
      auto vals = A.col_vals(j);
      const double hinv = H.inverse(b)(0, 0);
      for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c <= r; ++c) {
          int lo = std::min(rows[r], rows[c]), hi = std::max(rows[r], rows[c]);
          F.col_[lo][F.depth_[lo] - F.depth_[hi]] += vals[r] * vals[c] * hinv;
        }
      continue;
    }
    Eigen::MatrixXd K = block_normal(A, H, b);
    for (size_t r = 0; r < p.size(); ++r)
      for (size_t c = 0; c <= r; ++c) {
        // p ascending: p[c] is the descendant
        int lo = p[c], hi = p[r];
        F.col_[lo][F.depth_[lo] - F.depth_[hi]] += K(r, c);
      }
  }

  std::vector<int> anc;
  for (int j = 0; j < d; ++j) {
    auto& c = F.col_[j];
    if (!(c[0] > 1e-300)) throw NumericalError("matrix not positive definite at column " + std::to_string(j));
    const double ljj = std::sqrt(c[0]);
    c[0] = ljj;
    const size_t h = c.size();
    anc.clear();
    for (int u = j; u >= 0; u = F.parent_[u]) anc.push_back(u);
    for (size_t s = 1; s < h; ++s) c[s] /= ljj;
    for (size_t s = 1; s < h; ++s) {
      const double ls = c[s];
      if (ls == 0.0) continue;
      auto& ca = F.col_[anc[s]];
      for (size_t t = s; t < h; ++t)
        if (c[t] != 0.0) ca[t - s] -= c[t] * ls;
    }
  }
  return F;
}

double CholeskyFactor::entry(int i, int j) const {
  if (i < j) return 0.0;
  int k = depth_[j] - depth_[i];
  if (k < 0) return 0.0;
  int u = j;
  for (int s = 0; s < k; ++s) u = parent_[u];
  return u == i ? col_[j][k] : 0.0;
}

std::vector<int> CholeskyFactor::pattern(int j) const {
  std::vector<int> p;
  int u = j;
  for (size_t s = 0; s < col_[j].size(); ++s, u = parent_[u])
    if (col_[j][s] != 0.0) p.push_back(u);
  return p;
}

long CholeskyFactor::nnz() const {
  long n = 0;
  for (const auto& c : col_)
    for (double v : c) n += v != 0.0;
  return n;
}

void CholeskyFactor::overwrite(int j, std::vector<double> values) {
  if (recording_) history_[j].push_back({since_[j], std::move(col_[j])});
  col_[j] = std::move(values);
  since_[j] = version_ + 1;
}

namespace {

struct Touch {
  std::vector<int> cols;
  std::vector<std::vector<double>> old;
  std::vector<uint64_t> since;
  std::vector<size_t> hist;
};

}  // namespace

CholeskyFactor::UpdateSummary CholeskyFactor::rank_one_update(const SparseVec& w, int sign, bool keep_old) {
  UpdateSummary out;
  if (sign != 1 && sign != -1) throw StructuralError("sign must be +1 or -1");
  std::vector<int> pat;
  for (size_t t = 0; t < w.idx.size(); ++t)
    if (w.val[t] != 0.0) pat.push_back(w.idx[t]);
  for (double v : w.val)
    if (!std::isfinite(v)) throw ValueError("update vector is not finite");
  out.version = version_;
  if (pat.empty()) return out;
  const int k = low_of(pat);
  out.low = k;
  const int h = depth_[k];
  std::vector<int> anc = path(k);
  std::vector<double> wd(static_cast<size_t>(h), 0.0);
  for (size_t t = 0; t < w.idx.size(); ++t) wd[depth_[k] - depth_[w.idx[t]]] += w.val[t];

  Touch touch;
  auto rollback = [&]() {
    for (size_t q = 0; q < touch.cols.size(); ++q) {
      int j = touch.cols[q];
      col_[j] = touch.old[q];
      since_[j] = touch.since[q];
      history_[j].resize(touch.hist[q]);
    }
  };
  for (int m = 0; m < h; ++m) {
    if (wd[m] == 0.0) continue;
    const int j = anc[m];
    touch.cols.push_back(j);
    touch.old.push_back(col_[j]);
    touch.since.push_back(since_[j]);
    touch.hist.push_back(history_[j].size());
    std::vector<double> c = col_[j];
    const double ljj = c[0];
    const double r2 = ljj * ljj + sign * wd[m] * wd[m];
    if (!(r2 > 1e-300) || !std::isfinite(r2)) {
      rollback();
      throw NumericalError("downdate breaks positive definiteness at column " + std::to_string(j));
    }
    const double r = std::sqrt(r2), cc = r / ljj, s = wd[m] / ljj;
    c[0] = r;
    for (size_t t = 1; t < c.size(); ++t) {
      const double wi = wd[m + t];
      if (c[t] == 0.0 && wi == 0.0) continue;
      const double nl = (c[t] + sign * s * wi) / cc;
      wd[m + t] = cc * wi - s * nl;
      c[t] = nl;
    }
    overwrite(j, std::move(c));
  }
  ++version_;
  out.version = version_;
  std::vector<size_t> ord(touch.cols.size());
  for (size_t q = 0; q < ord.size(); ++q) ord[q] = q;
  std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return touch.cols[a] < touch.cols[b]; });
  for (size_t q : ord) {
    out.changed.push_back(touch.cols[q]);
    if (keep_old) out.old_cols.push_back(std::move(touch.old[q]));
  }
  return out;
}

CholeskyFactor::UpdateSummary CholeskyFactor::update_block(const SparseMatrix& A, int block,
                                                           const Eigen::MatrixXd& H_old,
                                                           const Eigen::MatrixXd& H_new, bool keep_old) {
  const int nb = A.block_size(block);
  const auto& p = A.block_pattern(block);
  Eigen::MatrixXd Ab = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size()), nb);
  for (int kk = 0; kk < nb; ++kk) {
    int j = A.block_begin(block) + kk;
    auto rows = A.col_rows(j);
    auto vals = A.col_vals(j);
    for (size_t t = 0; t < rows.size(); ++t) Ab(std::lower_bound(p.begin(), p.end(), rows[t]) - p.begin(), kk) = vals[t];
  }
  Eigen::VectorXd lam;
  Eigen::MatrixXd Q;
  if (nb == 1) {
    lam = Eigen::VectorXd::Constant(1, 1.0 / H_new(0, 0) - 1.0 / H_old(0, 0));
    Q = Eigen::MatrixXd::Ones(1, 1);
  } else {
    Eigen::MatrixXd D = H_new.inverse() - H_old.inverse();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (D + D.transpose()));
    lam = es.eigenvalues();
    Q = es.eigenvectors();
  }
  // all updates before downdates keeps intermediate matrices positive definite
  std::vector<int> idx(static_cast<size_t>(nb));
  for (int q = 0; q < nb; ++q) idx[q] = q;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return lam(a) > lam(b); });

  const uint64_t v0 = version_;
  UpdateSummary out;
  out.version = version_;
  std::vector<int> changed;
  std::vector<std::vector<double>> olds;
  std::vector<int> on_path;
  std::vector<uint64_t> since0;
  std::vector<size_t> hist0;
  if (!p.empty())
    for (int u : path(low_of(p))) {
      on_path.push_back(u);
      since0.push_back(since_[u]);
      hist0.push_back(history_[u].size());
    }
  try {
    for (int q : idx) {
      if (lam(q) == 0.0) continue;
      Eigen::VectorXd w = Ab * Q.col(q) * std::sqrt(std::abs(lam(q)));
      SparseVec sv;
      for (size_t t = 0; t < p.size(); ++t)
        if (w(t) != 0.0) {
          sv.idx.push_back(p[t]);
          sv.val.push_back(w(t));
        }
      // one logical version for the whole block change
      auto s = rank_one_update(sv, lam(q) > 0 ? 1 : -1, true);
      version_ = v0;
      for (size_t t = 0; t < s.changed.size(); ++t) {
        auto it = std::lower_bound(changed.begin(), changed.end(), s.changed[t]);
        if (it != changed.end() && *it == s.changed[t]) continue;
        olds.insert(olds.begin() + (it - changed.begin()), std::move(s.old_cols[t]));
        changed.insert(it, s.changed[t]);
      }
      if (s.low >= 0) out.low = out.low < 0 ? s.low : (depth_[s.low] > depth_[out.low] ? s.low : out.low);
    }
  } catch (...) {
    version_ = v0;
    for (size_t t = 0; t < changed.size(); ++t) col_[changed[t]] = olds[t];
    for (size_t t = 0; t < on_path.size(); ++t) {
      since_[on_path[t]] = since0[t];
      history_[on_path[t]].resize(hist0[t]);
    }
    throw;
  }
  if (!changed.empty()) {
    // a column touched by several rank-1 steps keeps only its pre-block snapshot
    for (size_t t = 0; t < on_path.size(); ++t) history_[on_path[t]].resize(std::min(history_[on_path[t]].size(), hist0[t] + 1));
    ++version_;
  }
  out.version = version_;
  out.changed = std::move(changed);
  if (keep_old) out.old_cols = std::move(olds);
  return out;
}

SparseVec CholeskyFactor::solve_lower(const SparseVec& v) const {
  const int d = dim();
  if (static_cast<int>(scratch.size()) < d) scratch.assign(static_cast<size_t>(d), 0.0);
  std::vector<int> nodes;
  // union of root paths of the pattern
  static thread_local std::vector<char> seen;
  if (static_cast<int>(seen.size()) < d) seen.assign(static_cast<size_t>(d), 0);
  for (size_t t = 0; t < v.idx.size(); ++t) {
    for (int u = v.idx[t]; u >= 0 && !seen[u]; u = parent_[u]) {
      seen[u] = 1;
      nodes.push_back(u);
    }
    scratch[v.idx[t]] += v.val[t];
  }
  std::sort(nodes.begin(), nodes.end());
  for (int j : nodes) {
    double xj = scratch[j];
    if (xj == 0.0) continue;
    const auto& c = col_[j];
    xj /= c[0];
    scratch[j] = xj;
    int u = parent_[j];
    for (size_t s = 1; s < c.size(); ++s, u = parent_[u])
      if (c[s] != 0.0) scratch[u] -= c[s] * xj;
  }
  SparseVec x;
  for (int j : nodes) {
    if (scratch[j] != 0.0) {
      x.idx.push_back(j);
      x.val.push_back(scratch[j]);
    }
    scratch[j] = 0.0;
    seen[j] = 0;
  }
  return x;
}

std::vector<double> CholeskyFactor::solve_lower_dense(std::vector<double> x) const {
  for (int j = 0; j < dim(); ++j) {
    if (x[j] == 0.0) continue;
    const auto& c = col_[j];
    x[j] /= c[0];
    int u = parent_[j];
    for (size_t s = 1; s < c.size(); ++s, u = parent_[u])
      if (c[s] != 0.0) x[u] -= c[s] * x[j];
  }
  return x;
}

std::vector<double> CholeskyFactor::solve_upper_dense(std::vector<double> z) const {
  for (int j = dim() - 1; j >= 0; --j) {
    const auto& c = col_[j];
    double acc = z[j];
    int u = parent_[j];
    for (size_t s = 1; s < c.size(); ++s, u = parent_[u])
      if (c[s] != 0.0) acc -= c[s] * z[u];
    z[j] = acc / c[0];
  }
  return z;
}

std::vector<double> CholeskyFactor::solve_upper_path(const std::vector<double>& y, int v) const {
  std::vector<int> p = path(v);
  const int h = static_cast<int>(p.size());
  std::vector<double> z(static_cast<size_t>(h));
  for (int m = h - 1; m >= 0; --m) {
    const auto& c = col_[p[m]];
    double acc = y[p[m]];
    for (int s = 1; s < h - m; ++s)
      if (c[s] != 0.0) acc -= c[s] * z[m + s];
    z[m] = acc / c[0];
  }
  return z;
}

std::vector<double> CholeskyFactor::solve_upper_restricted(const std::vector<double>& y,
                                                           const std::vector<int>& S) const {
  if (S.empty()) return {};
  const int k = low_of(S);
  auto z = solve_upper_path(y, k);
  std::vector<double> out;
  for (int a : S) out.push_back(z[depth_[k] - depth_[a]]);
  return out;
}

double CholeskyFactor::solve_upper_coordinate(const std::vector<double>& v, int i) const {
  // e_i^T L^-T v = (L^-1 e_i) . v, and L^-1 e_i lives on P(i)
  std::vector<int> p = path(i);
  const int h = static_cast<int>(p.size());
  std::vector<double> x(static_cast<size_t>(h), 0.0);
  x[0] = 1.0;
  double dot = 0.0;
  for (int m = 0; m < h; ++m) {
    if (x[m] == 0.0) continue;
    const auto& c = col_[p[m]];
    x[m] /= c[0];
    for (int s = 1; s < h - m; ++s)
      if (c[s] != 0.0) x[m + s] -= c[s] * x[m];
    dot += x[m] * v[p[m]];
  }
  return dot;
}

std::vector<double> CholeskyFactor::multiply_lower(const std::vector<double>& x) const {
  std::vector<double> y(x.size(), 0.0);
  for (int j = 0; j < dim(); ++j) {
    if (x[j] == 0.0) continue;
    const auto& c = col_[j];
    int u = j;
    for (size_t s = 0; s < c.size(); ++s, u = parent_[u]) y[u] += c[s] * x[j];
  }
  return y;
}

std::vector<double> CholeskyFactor::multiply_upper(const std::vector<double>& x) const {
  std::vector<double> y(x.size(), 0.0);
  for (int j = 0; j < dim(); ++j) {
    const auto& c = col_[j];
    double acc = 0.0;
    int u = j;
    for (size_t s = 0; s < c.size(); ++s, u = parent_[u]) acc += c[s] * x[u];
    y[j] = acc;
  }
  return y;
}

std::vector<double> CholeskyFactor::historical_column(int j, uint64_t t) const {
  if (t > version_)
    throw StructuralError("version " + std::to_string(t) + " is in the future (current " + std::to_string(version_) + ")");
  if (t >= since_[j]) return col_[j];
  const auto& h = history_[j];
  auto it = std::upper_bound(h.begin(), h.end(), t, [](uint64_t v, const Snapshot& s) { return v < s.since; });
  if (it == h.begin()) throw StructuralError("history for column " + std::to_string(j) + " at version " +
                                             std::to_string(t) + " was not recorded");
  return std::prev(it)->values;
}

void CholeskyFactor::clear_history() {
  for (auto& h : history_) h.clear();
}

Eigen::MatrixXd CholeskyFactor::dense() const {
  const int d = dim();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    int u = j;
    for (size_t s = 0; s < col_[j].size(); ++s, u = parent_[u]) L(u, j) = col_[j][s];
  }
  return L;
}


OrderedSystem order_system(const SparseMatrix& A, const TreeDecomposition& td) {
  Graph G = dual_graph(A);
  EliminationTree T = make_elim_order_and_tree(G, td);
  OrderedSystem sys;
  sys.perm = T.orders();
  sys.A = A.permute_rows(sys.perm);
  sys.T = T.relabeled();
  return sys;
}

}  // namespace twlp
