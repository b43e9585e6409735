#include "twlp/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "twlp/errors.hpp"
#include "twlp/rng.hpp"

namespace twlp {

// ---------------------------------------------------------------- sketch matrix

double SketchMatrix::entry(int row, int col) const {
  return keyed_normal(seed_, static_cast<uint64_t>(row), static_cast<uint64_t>(col)) / std::sqrt(static_cast<double>(r_));
}

std::vector<double> SketchMatrix::column(int col) const {
  std::vector<double> c(static_cast<size_t>(r_));
  for (int k = 0; k < r_; ++k) c[k] = entry(k, col);
  return c;
}

void SketchMatrix::add_column(int col, double a, std::vector<double>& y) const {
  if (a == 0.0) return;
  for (int k = 0; k < r_; ++k) y[k] += a * entry(k, col);
}

std::vector<double> SketchMatrix::apply(const std::vector<double>& v) const {
  std::vector<double> y(static_cast<size_t>(r_), 0.0);
  for (int j = 0; j < n_; ++j) add_column(j, v[j], y);
  return y;
}

int default_sketch_dim(long N, int height, int n, int k) {
  const double a = 16.0 * std::pow(std::log(static_cast<double>(N) + 3.0), 3);
  const double b = 4.0 * height * height * std::log(16.0 * n * std::max(k, 1));
  return static_cast<int>(std::ceil(std::max(a, b)));
}

// ---------------------------------------------------------------- sampling trees

int SamplingTree::height() const {
  int best = 0;
  std::vector<std::pair<int, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [v, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    for (int c : nodes[v].children) stack.push_back({c, d + 1});
  }
  return best;
}

std::vector<int> SamplingTree::path_to_root(int v) const {
  std::vector<int> p;
  for (; v >= 0; v = nodes[v].parent) p.push_back(v);
  return p;
}

std::string SamplingTree::check_axioms(int n) const {
  const auto& r = nodes[root].chi;
  if (static_cast<int>(r.size()) != n) return "chi(root) has " + std::to_string(r.size()) + " columns";
  for (int j = 0; j < n; ++j)
    if (r[j] != j) return "chi(root) is not [n]";
  for (int v = 0; v < size(); ++v) {
    const auto& nd = nodes[v];
    if (nd.children.empty()) {
      if (nd.chi.size() != 1) return "leaf " + std::to_string(v) + " has |chi| != 1";
      continue;
    }
    std::vector<int> u;
    for (int c : nd.children) {
      if (nodes[c].parent != v) return "parent link broken at " + std::to_string(c);
      u.insert(u.end(), nodes[c].chi.begin(), nodes[c].chi.end());
    }
    std::sort(u.begin(), u.end());
    if (u != nd.chi) return "children of " + std::to_string(v) + " do not partition chi";
  }
  return {};
}

std::vector<int> column_lows(const SparseMatrix& A, const EliminationTree& T) {
  std::vector<int> lows(static_cast<size_t>(A.cols()), -1);
  for (int j = 0; j < A.cols(); ++j) {
    auto rows = A.col_rows(j);
    if (!rows.empty()) lows[j] = low(T, std::vector<int>(rows.begin(), rows.end()));
  }
  return lows;
}

namespace {

struct Builder {
  SamplingTree S;
  int add(int parent) {
    SamplingTree::Node nd;
    nd.parent = parent;
    S.nodes.push_back(nd);
    const int id = static_cast<int>(S.nodes.size()) - 1;
    if (parent >= 0) S.nodes[parent].children.push_back(id);
    return id;
  }
  // balanced binary tree over cols below `parent`; a single column becomes
  // one leaf
  void hang(int parent, const std::vector<int>& cols, size_t a, size_t b) {
    const int v = add(parent);
    S.nodes[v].chi.assign(cols.begin() + static_cast<long>(a), cols.begin() + static_cast<long>(b));
    if (b - a == 1) {
      S.leaf_of[cols[a]] = v;
      return;
    }
    const size_t m = (a + b) / 2;
    hang(v, cols, a, m);
    hang(v, cols, m, b);
  }
  // chi of internal nodes as the union of the children, bottom up
  void fill_chi(int v) {
    auto& nd = S.nodes[v];
    if (nd.children.empty()) return;
    std::vector<int> u = nd.chi;
    for (int c : nd.children) {
      fill_chi(c);
      u.insert(u.end(), S.nodes[c].chi.begin(), S.nodes[c].chi.end());
    }
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    S.nodes[v].chi = std::move(u);
  }
  // drop nodes with empty chi, renumbering
  void prune() {
    std::vector<int> id(S.nodes.size(), -1);
    std::vector<SamplingTree::Node> kept;
    std::function<void(int, int)> rec = [&](int v, int parent) {
      if (S.nodes[v].chi.empty()) return;
      SamplingTree::Node nd = S.nodes[v];
      nd.parent = parent;
      nd.children.clear();
      id[v] = static_cast<int>(kept.size());
      kept.push_back(nd);
      if (parent >= 0) kept[parent].children.push_back(id[v]);
      for (int c : S.nodes[v].children) rec(c, id[v]);
    };
    rec(S.root, -1);
    for (auto& l : S.leaf_of) l = id[l];
    for (auto& b : S.of_bnode)
      if (b >= 0) b = id[b];
    S.nodes = std::move(kept);
    S.root = 0;
  }
};

std::vector<std::vector<int>> columns_by_low(const SparseMatrix& A, const EliminationTree& T) {
  std::vector<std::vector<int>> F(static_cast<size_t>(T.size()));
  const auto lows = column_lows(A, T);
  for (int j = 0; j < A.cols(); ++j) F[lows[j] >= 0 ? lows[j] : T.root()].push_back(j);
  return F;
}

}  // namespace

SamplingTree binary_sampling_tree(int n) {
  if (n < 1) throw StructuralError("sampling tree needs n >= 1");
  Builder B;
  B.S.leaf_of.assign(static_cast<size_t>(n), -1);
  std::vector<int> cols(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) cols[j] = j;
  B.hang(-1, cols, 0, cols.size());
  B.S.root = 0;
  return B.S;
}

SamplingTree build_simple_sampling_tree(const EliminationTree& T, const SparseMatrix& A) {
  if (A.rows() != T.size()) throw StructuralError("sampling tree: tree and matrix disagree");
  Builder B;
  B.S.leaf_of.assign(static_cast<size_t>(A.cols()), -1);
  const auto F = columns_by_low(A, T);
  std::vector<int> node(static_cast<size_t>(T.size()), -1);
  // preorder over T so parents exist first
  std::vector<int> stack{T.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    node[v] = B.add(T.parent(v) >= 0 ? node[T.parent(v)] : -1);
    B.S.nodes[node[v]].tvertex = v;
    if (!F[v].empty()) B.hang(node[v], F[v], 0, F[v].size());
    for (int c : T.children(v)) stack.push_back(c);
  }
  B.S.root = node[T.root()];
  B.fill_chi(B.S.root);
  B.prune();
  return B.S;
}

SamplingTree build_balanced_sampling_tree(const EliminationTree& T, const SparseMatrix& A) {
  if (A.rows() != T.size()) throw StructuralError("sampling tree: tree and matrix disagree");
  const int d = T.size();
  Builder B;
  B.S.leaf_of.assign(static_cast<size_t>(A.cols()), -1);
  const auto F = columns_by_low(A, T);
  BalancedBinaryTree BT(d);
  B.S.of_bnode.assign(static_cast<size_t>(BT.num_nodes() + 1), -1);
  std::vector<int> stack{BT.root()};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const int id = B.add(v == BT.root() ? -1 : B.S.of_bnode[BT.parent(v)]);
    B.S.nodes[id].bnode = v;
    B.S.of_bnode[v] = id;
    if (BT.is_leaf(v)) {
      const int u = T.sigma()[BT.lo(v)];
      const auto& cols = F[u];
      if (cols.size() == 1) {
        B.S.nodes[id].chi = cols;
        B.S.leaf_of[cols[0]] = id;
      } else if (!cols.empty()) {
        const size_t m = cols.size() / 2;
        B.hang(id, cols, 0, m);
        B.hang(id, cols, m, cols.size());
      }
    } else {
      stack.push_back(BT.right(v));
      stack.push_back(BT.left(v));
    }
  }
  B.S.root = B.S.of_bnode[BT.root()];
  B.fill_chi(B.S.root);
  B.prune();
  return B.S;
}

// ---------------------------------------------------------------- vector sketch

VectorSketch::VectorSketch(const SamplingTree& S, const SketchMatrix& Phi, const std::vector<double>& v)
    : S_(&S), Phi_(&Phi), v_(v) {
  const int r = Phi.rows();
  y_.assign(static_cast<size_t>(S.size()), std::vector<double>(static_cast<size_t>(r), 0.0));
  // leaves first, then every node adds into its parent in reverse preorder
  for (size_t j = 0; j < v.size(); ++j) Phi.add_column(static_cast<int>(j), v[j], y_[S.leaf_of[j]]);
  std::vector<int> order{S.root};
  for (size_t k = 0; k < order.size(); ++k)
    for (int c : S.nodes[order[k]].children) order.push_back(c);
  for (size_t k = order.size(); k-- > 1;) {
    const int v0 = order[k], p = S.nodes[v0].parent;
    for (int q = 0; q < r; ++q) y_[p][q] += y_[v0][q];
  }
}

long VectorSketch::update_entry(int j, double value) {
  const double delta = value - v_[j];
  if (delta == 0.0) return 0;
  v_[j] = value;
  const std::vector<double> col = Phi_->column(j);
  long touched = 0;
  for (int u = S_->leaf_of[j]; u >= 0; u = S_->nodes[u].parent, ++touched)
    for (size_t q = 0; q < col.size(); ++q) y_[u][q] += delta * col[q];
  return touched;
}

long VectorSketch::update(const std::vector<double>& v_new) {
  long touched = 0;
  for (size_t j = 0; j < v_new.size(); ++j) touched += update_entry(static_cast<int>(j), v_new[j]);
  return touched;
}

// ---------------------------------------------------------------- balanced sketch

BalancedSketch::BalancedSketch(const SamplingTree& S, const SketchMatrix& Phi, const SparseMatrix& A,
                               const EliminationTree& T, const std::vector<double>& H, const CholeskyFactor& L)
    : S_(&S), Phi_(&Phi), A_(&A), T_(&T), L_(&L), H_(H), lows_(column_lows(A, T)) {
  if (!L.recording()) throw StructuralError("balanced sketch needs a factor that records history");
  Z_.resize(static_cast<size_t>(S.size()));
  for (int v = 0; v < S.size(); ++v)
    if (S.nodes[v].bnode >= 0) Z_[v] = fresh(v);
}

void BalancedSketch::forward(const std::vector<int>& supp, std::vector<double>& z) const {
  const int r = Phi_->rows();
  for (size_t a = 0; a < supp.size(); ++a) {
    const int j = supp[a];
    const auto& c = L_->column(j);
    double* zj = z.data() + a * r;
    for (int q = 0; q < r; ++q) zj[q] /= c[0];
    int u = L_->parent(j);
    for (size_t s = 1; s < c.size(); ++s, u = L_->parent(u)) {
      if (c[s] == 0.0) continue;
      const size_t b = std::lower_bound(supp.begin(), supp.end(), u) - supp.begin();
      double* zu = z.data() + b * r;
      for (int q = 0; q < r; ++q) zu[q] -= c[s] * zj[q];
    }
  }
}

BalancedSketch::ZBlock BalancedSketch::fresh(int node) const {
  const int r = Phi_->rows();
  ZBlock Z;
  std::vector<char> seen(static_cast<size_t>(A_->rows()), 0);
  for (int j : S_->nodes[node].chi)
    for (int row : A_->col_rows(j))
      for (int u = row; u >= 0 && !seen[u]; u = L_->parent(u)) {
        seen[u] = 1;
        Z.supp.push_back(u);
      }
  std::sort(Z.supp.begin(), Z.supp.end());
  Z.z.assign(Z.supp.size() * r, 0.0);
  for (int j : S_->nodes[node].chi) {
    const double sc = 1.0 / std::sqrt(H_[j]);
    auto rows = A_->col_rows(j);
    auto vals = A_->col_vals(j);
    for (size_t t = 0; t < rows.size(); ++t) {
      const size_t b = std::lower_bound(Z.supp.begin(), Z.supp.end(), rows[t]) - Z.supp.begin();
      for (int q = 0; q < r; ++q) Z.z[b * r + q] += vals[t] * sc * Phi_->entry(q, j);
    }
  }
  forward(Z.supp, Z.z);
  Z.t = L_->version();
  return Z;
}

void BalancedSketch::catch_up(ZBlock& Z) const {
  const uint64_t now = L_->version();
  if (Z.t == now) return;
  const int r = Phi_->rows();
  // Z^T <- Z^T - L_now^-1 (L_now - L[t]) Z^T
  std::vector<double> delta(Z.z.size(), 0.0);
  bool any = false;
  for (size_t a = 0; a < Z.supp.size(); ++a) {
    const int j = Z.supp[a];
    if (L_->column_since(j) <= Z.t) continue;
    const auto& cn = L_->column(j);
    const std::vector<double> co = L_->historical_column(j, Z.t);
    int u = j;
    for (size_t s = 0; s < cn.size(); ++s, u = L_->parent(u)) {
      const double dl = cn[s] - (s < co.size() ? co[s] : 0.0);
      if (dl == 0.0) continue;
      any = true;
      const size_t b = s == 0 ? a : std::lower_bound(Z.supp.begin(), Z.supp.end(), u) - Z.supp.begin();
      for (int q = 0; q < r; ++q) delta[b * r + q] += dl * Z.z[a * r + q];
    }
  }
  if (any) {
    forward(Z.supp, delta);
    for (size_t k = 0; k < Z.z.size(); ++k) Z.z[k] -= delta[k];
  }
  Z.t = now;
}

void BalancedSketch::update_h(int j, double h_new) {
  const double dsc = 1.0 / std::sqrt(h_new) - 1.0 / std::sqrt(H_[j]);
  H_[j] = h_new;
  if (dsc == 0.0) return;
  const int r = Phi_->rows();
  auto rows = A_->col_rows(j);
  auto vals = A_->col_vals(j);
  for (int v = S_->leaf_of[j]; v >= 0; v = S_->nodes[v].parent) {
    ++touched_;
    if (S_->nodes[v].bnode < 0) continue;
    ZBlock& Z = Z_[v];
    catch_up(Z);
    // the change of J_v is a_j dsc Phi_j^T, pushed through L^-1
    std::vector<double> add(Z.z.size(), 0.0);
    for (size_t t = 0; t < rows.size(); ++t) {
      const size_t b = std::lower_bound(Z.supp.begin(), Z.supp.end(), rows[t]) - Z.supp.begin();
      for (int q = 0; q < r; ++q) add[b * r + q] += vals[t] * dsc * Phi_->entry(q, j);
    }
    forward(Z.supp, add);
    for (size_t k = 0; k < Z.z.size(); ++k) Z.z[k] += add[k];
  }
}

std::vector<double> BalancedSketch::query(int node, const std::vector<double>& u) {
  const int r = Phi_->rows();
  std::vector<double> y(static_cast<size_t>(r), 0.0);
  if (S_->nodes[node].bnode >= 0) {
    ZBlock& Z = Z_[node];
    catch_up(Z);
    for (size_t a = 0; a < Z.supp.size(); ++a) {
      const double ua = u[Z.supp[a]];
      if (ua == 0.0) continue;
      for (int q = 0; q < r; ++q) y[q] += Z.z[a * r + q] * ua;
    }
    return y;
  }
  // below the binary tree every column shares one low vertex
  const auto& chi = S_->nodes[node].chi;
  int low = -1;
  for (int j : chi)
    if (lows_[j] >= 0) low = lows_[j];
  if (low < 0) return y;
  const std::vector<double> z = L_->solve_upper_path(u, low);
  for (int j : chi) {
    auto rows = A_->col_rows(j);
    auto vals = A_->col_vals(j);
    double w = 0.0;
    for (size_t t = 0; t < rows.size(); ++t) w += vals[t] * z[L_->depth(low) - L_->depth(rows[t])];
    Phi_->add_column(j, w / std::sqrt(H_[j]), y);
  }
  return y;
}

uint64_t BalancedSketch::timestamp(int node) const { return Z_[node].t; }

double BalancedSketch::z_error(int node) const {
  if (S_->nodes[node].bnode < 0) return 0.0;
  ZBlock cur = Z_[node];
  catch_up(cur);
  const ZBlock ref = fresh(node);
  double err = 0.0, sc = 1e-300;
  for (double v : ref.z) sc = std::max(sc, std::fabs(v));
  for (size_t k = 0; k < ref.z.size(); ++k) err = std::max(err, std::fabs(ref.z[k] - cur.z[k]));
  return err / sc;
}

}  // namespace twlp
