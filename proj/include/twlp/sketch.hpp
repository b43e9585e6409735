#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twlp/cholesky.hpp"
#include "twlp/elim_tree.hpp"
#include "twlp/sparse.hpp"

namespace twlp {

// r x n Gaussian map with N(0, 1/r) entries, generated from (seed, row, col)
// so no column is ever stored.
class SketchMatrix {
 public:
  SketchMatrix() = default;
  SketchMatrix(int r, int n, uint64_t seed) : r_(r), n_(n), seed_(seed) {}
  int rows() const { return r_; }
  int cols() const { return n_; }
  uint64_t seed() const { return seed_; }
  double entry(int row, int col) const;
  std::vector<double> column(int col) const;
  // y += a * Phi e_col
  void add_column(int col, double a, std::vector<double>& y) const;
  std::vector<double> apply(const std::vector<double>& v) const;

 private:
  int r_ = 0, n_ = 0;
  uint64_t seed_ = 0;
};

// default sketch dimension: max(16 ln^3(N+3), 4 height^2 ln(16 n k))
int default_sketch_dim(long N, int height, int n, int k);

// Rooted tree whose node labels chi partition [n] level by level.
struct SamplingTree {
  struct Node {
    int parent = -1;
    std::vector<int> children;
    std::vector<int> chi;  // ascending columns
    int bnode = -1;        // node of the binary tree over sigma, balanced variant only
    int tvertex = -1;      // elimination tree vertex, simple variant only
  };
  std::vector<Node> nodes;
  int root = 0;
  std::vector<int> leaf_of;  // column -> leaf node
  std::vector<int> of_bnode;  // binary tree node -> node, -1 when pruned

  int size() const { return static_cast<int>(nodes.size()); }
  bool is_leaf(int v) const { return nodes[v].children.empty(); }
  int height() const;  // edges on the longest root-leaf path
  std::vector<int> path_to_root(int v) const;
  // empty when the three axioms hold, else a description
  std::string check_axioms(int n) const;
};

// Lowest elimination-tree vertex of column j's pattern, -1 for empty columns.
std::vector<int> column_lows(const SparseMatrix& A, const EliminationTree& T);

// Balanced binary tree over [n], for vectors not tied to a matrix.
SamplingTree binary_sampling_tree(int n);

// Tree vertices as nodes, column j hanging below low(A_j) under a balanced
// binary tree.  T's vertices are A's rows.
SamplingTree build_simple_sampling_tree(const EliminationTree& T, const SparseMatrix& A);
// Complete binary tree over the heavy-light order, columns hanging below
// the leaf of their low vertex.
SamplingTree build_balanced_sampling_tree(const EliminationTree& T, const SparseMatrix& A);

// Phi_{chi(v)} v for every node of a sampling tree.
class VectorSketch {
 public:
  VectorSketch() = default;
  VectorSketch(const SamplingTree& S, const SketchMatrix& Phi, const std::vector<double>& v);
  // changes only the root paths of changed leaves; returns nodes touched
  long update(const std::vector<double>& v_new);
  long update_entry(int j, double value);
  const std::vector<double>& query(int node) const { return y_[node]; }
  const std::vector<double>& vector() const { return v_; }

 private:
  const SamplingTree* S_ = nullptr;
  const SketchMatrix* Phi_ = nullptr;
  std::vector<double> v_;
  std::vector<std::vector<double>> y_;
};

// Maintains Z_v = Phi_{chi(v)} H^-1/2 A^T L^-T at a timestamp per binary tree
// node and answers Phi_{chi(v)} W^T u = Z_v u for any d-vector u, catching Z_v
// up to the factor's current version on demand.  The factor must be
// recording history from construction on.
class BalancedSketch {
 public:
  BalancedSketch() = default;
  BalancedSketch(const SamplingTree& S, const SketchMatrix& Phi, const SparseMatrix& A, const EliminationTree& T,
                 const std::vector<double>& H, const CholeskyFactor& L);

  // H_j changed to h_new; call after the factor has been updated
  void update_h(int j, double h_new);
  std::vector<double> query(int node, const std::vector<double>& u);
  long nodes_touched() const { return touched_; }
  uint64_t timestamp(int node) const;
  // Z_v recomputed from scratch at the current version, for tests
  double z_error(int node) const;

 private:
  struct ZBlock {
    std::vector<int> supp;       // ascending tree vertices, closed upward
    std::vector<double> z;       // supp.size() x r, row major
    uint64_t t = 0;
  };
  void catch_up(ZBlock& Z) const;
  ZBlock fresh(int node) const;
  // rows of Z (indexed like supp) <- L^-1 rows, in place
  void forward(const std::vector<int>& supp, std::vector<double>& z) const;

  const SamplingTree* S_ = nullptr;
  const SketchMatrix* Phi_ = nullptr;
  const SparseMatrix* A_ = nullptr;
  const EliminationTree* T_ = nullptr;
  const CholeskyFactor* L_ = nullptr;
  std::vector<double> H_;
  std::vector<int> lows_;
  std::vector<ZBlock> Z_;  // per node; empty supp for nodes outside the binary tree
  long touched_ = 0;
};

}  // namespace twlp
