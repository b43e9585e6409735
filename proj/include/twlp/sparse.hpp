#pragma once

#include <span>
#include <vector>

namespace twlp {

struct Triplet {
  int row;
  int col;
  double val;
};

class SparseMatrix;

// Duplicates are summed; entries that sum to exactly zero are dropped.
// Empty block_sizes means ncols blocks of size 1.
// Throws StructuralError on out-of-range indices, ValueError on NaN/inf.
SparseMatrix build_csc(const std::vector<Triplet>& triplets, int nrows, int ncols,
                       std::vector<int> block_sizes = {});
SparseMatrix build_csc(const std::vector<Triplet>& triplets, int nrows,
                       const std::vector<int>& block_sizes);

// Compressed sparse column matrix whose columns are grouped into contiguous
// blocks.  Each block i also carries its merged row pattern (the union of the
// row patterns of its columns).
class SparseMatrix {
 public:
  SparseMatrix() = default;

  int rows() const { return nrows_; }
  int cols() const { return ncols_; }
  int num_blocks() const { return static_cast<int>(block_start_.size()) - 1; }
  long nnz() const { return static_cast<long>(ri_.size()); }

  std::span<const int> col_rows(int j) const {
    return {ri_.data() + cp_[j], static_cast<size_t>(cp_[j + 1] - cp_[j])};
  }
  std::span<const double> col_vals(int j) const {
    return {vx_.data() + cp_[j], static_cast<size_t>(cp_[j + 1] - cp_[j])};
  }

  int block_begin(int b) const { return block_start_[b]; }
  int block_end(int b) const { return block_start_[b + 1]; }
  int block_size(int b) const { return block_start_[b + 1] - block_start_[b]; }
  int block_of(int col) const { return col_block_[col]; }
  int max_block_size() const;
  std::vector<int> block_sizes() const;

  // merged row pattern of block b, ascending
  const std::vector<int>& block_pattern(int b) const { return pattern_[b]; }

  std::vector<Triplet> to_triplets() const;

  // y = A x and y = A^T x (dense)
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply_transpose(std::span<const double> y) const;

  double frobenius_norm() const;
  // spectral norm estimate by power iteration on A^T A
  double norm2_estimate(int iters = 50) const;

  // Row relabel: new row of old row r is perm[r].
  SparseMatrix permute_rows(std::span<const int> perm) const;

 private:
  friend SparseMatrix build_csc(const std::vector<Triplet>&, int, int, std::vector<int>);
  int nrows_ = 0;
  int ncols_ = 0;
  std::vector<int> cp_{0};
  std::vector<int> ri_;
  std::vector<double> vx_;
  std::vector<int> block_start_{0};
  std::vector<int> col_block_;
  std::vector<std::vector<int>> pattern_;
};

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;  // sorted, deduplicated, no self loops

  explicit Graph(int n_ = 0) : n(n_), adj(static_cast<size_t>(n_)) {}
  long num_edges() const;
  bool has_edge(int u, int v) const;
  // Builds from an edge list; loops dropped, duplicates merged.
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);
};

// Rows i, j adjacent iff some block has both in its pattern.
Graph dual_graph(const SparseMatrix& A);

const std::vector<int>& column_block_pattern(const SparseMatrix& A, int block);

}  // namespace twlp
