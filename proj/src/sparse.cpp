#include "twlp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "twlp/errors.hpp"

namespace twlp {

SparseMatrix build_csc(const std::vector<Triplet>& triplets, int nrows, int ncols,
                       std::vector<int> block_sizes) {
  if (nrows < 0 || ncols < 0) throw StructuralError("negative matrix dimension");
  if (block_sizes.empty()) block_sizes.assign(static_cast<size_t>(ncols), 1);
  long total = 0;
  for (int b : block_sizes) {
    if (b <= 0) throw StructuralError("block size must be positive");
    total += b;
  }
  if (total != ncols)
    throw StructuralError("block sizes sum to " + std::to_string(total) + ", expected " +
                          std::to_string(ncols));

  std::vector<Triplet> t = triplets;
  for (const auto& e : t) {
    if (e.row < 0 || e.row >= nrows || e.col < 0 || e.col >= ncols)
      throw StructuralError("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                            ") out of range");
    if (!std::isfinite(e.val))
      throw ValueError("non-finite value at (" + std::to_string(e.row) + "," +
                       std::to_string(e.col) + ")");
  }
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });

  SparseMatrix A;
  A.nrows_ = nrows;
  A.ncols_ = ncols;
  A.cp_.assign(static_cast<size_t>(ncols) + 1, 0);
  size_t i = 0;
  for (int j = 0; j < ncols; ++j) {
    while (i < t.size() && t[i].col == j) {
      int r = t[i].row;
      double v = 0.0;
      while (i < t.size() && t[i].col == j && t[i].row == r) v += t[i++].val;
      if (!std::isfinite(v)) throw ValueError("summed value overflows at column " + std::to_string(j));
      if (v != 0.0) {
        A.ri_.push_back(r);
        A.vx_.push_back(v);
      }
    }
    A.cp_[j + 1] = static_cast<int>(A.ri_.size());
  }

  A.block_start_.assign(1, 0);
  A.col_block_.resize(static_cast<size_t>(ncols));
  for (size_t b = 0; b < block_sizes.size(); ++b) {
    int s = A.block_start_.back();
    for (int j = s; j < s + block_sizes[b]; ++j) A.col_block_[j] = static_cast<int>(b);
    A.block_start_.push_back(s + block_sizes[b]);
  }
  A.pattern_.resize(block_sizes.size());
  for (int b = 0; b < A.num_blocks(); ++b) {
    auto& p = A.pattern_[b];
    for (int j = A.block_begin(b); j < A.block_end(b); ++j)
      for (int r : A.col_rows(j)) p.push_back(r);
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  return A;
}

SparseMatrix build_csc(const std::vector<Triplet>& triplets, int nrows,
                       const std::vector<int>& block_sizes) {
  int n = std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
  return build_csc(triplets, nrows, n, block_sizes);
}

int SparseMatrix::max_block_size() const {
  int m = 0;
  for (int b = 0; b < num_blocks(); ++b) m = std::max(m, block_size(b));
  return m;
}

std::vector<int> SparseMatrix::block_sizes() const {
  std::vector<int> s;
  for (int b = 0; b < num_blocks(); ++b) s.push_back(block_size(b));
  return s;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
  std::vector<Triplet> t;
  t.reserve(ri_.size());
  for (int j = 0; j < ncols_; ++j)
    for (int p = cp_[j]; p < cp_[j + 1]; ++p) t.push_back({ri_[p], j, vx_[p]});
  return t;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<size_t>(nrows_), 0.0);
  for (int j = 0; j < ncols_; ++j) {
    double xj = x[j];
    if (xj == 0.0) continue;
    for (int p = cp_[j]; p < cp_[j + 1]; ++p) y[ri_[p]] += vx_[p] * xj;
  }
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> y) const {
  std::vector<double> x(static_cast<size_t>(ncols_), 0.0);
  for (int j = 0; j < ncols_; ++j) {
    double s = 0.0;
    for (int p = cp_[j]; p < cp_[j + 1]; ++p) s += vx_[p] * y[ri_[p]];
    x[j] = s;
  }
  return x;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : vx_) s += v * v;
  return std::sqrt(s);
}

double SparseMatrix::norm2_estimate(int iters) const {
  if (ncols_ == 0 || nrows_ == 0 || vx_.empty()) return 0.0;
  // deterministic start vector, avoids orthogonality with the top singular vector in practice
  std::vector<double> x(static_cast<size_t>(ncols_));
  for (int j = 0; j < ncols_; ++j) x[j] = 1.0 + 0.1 * std::sin(1.0 + j);
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (nx == 0.0) return 0.0;
    for (double& v : x) v /= nx;
    auto y = multiply(x);
    x = multiply_transpose(y);
    lam = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  }
  return std::sqrt(lam);
}

SparseMatrix SparseMatrix::permute_rows(std::span<const int> perm) const {
  auto t = to_triplets();
  for (auto& e : t) e.row = perm[e.row];
  return build_csc(t, nrows_, ncols_, block_sizes());
}

long Graph::num_edges() const {
  long s = 0;
  for (const auto& a : adj) s += static_cast<long>(a.size());
  return s / 2;
}

bool Graph::has_edge(int u, int v) const {
  return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Graph g(n);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw StructuralError("edge endpoint out of range");
    if (u == v) continue;
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

Graph dual_graph(const SparseMatrix& A) {
  std::vector<std::pair<int, int>> e;
  for (int b = 0; b < A.num_blocks(); ++b) {
    const auto& p = A.block_pattern(b);
    for (size_t i = 0; i < p.size(); ++i)
      for (size_t j = i + 1; j < p.size(); ++j) e.emplace_back(p[i], p[j]);
  }
  return Graph::from_edges(A.rows(), e);
}

const std::vector<int>& column_block_pattern(const SparseMatrix& A, int block) {
  if (block < 0 || block >= A.num_blocks())
    throw StructuralError("block index " + std::to_string(block) + " out of range");
  return A.block_pattern(block);
}

}  // namespace twlp
