#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "twlp/elim_tree.hpp"
#include "twlp/sparse.hpp"

namespace twlp {

struct SparseVec {
  std::vector<int> idx;  // ascending
  std::vector<double> val;
  size_t size() const { return idx.size(); }
};

// Block diagonal SPD matrix with cached inverse and (inverse) square roots.
class DiagonalBlockHessian {
 public:
  DiagonalBlockHessian() = default;
  // identity with the given blocks
  explicit DiagonalBlockHessian(const std::vector<int>& block_sizes);
  static DiagonalBlockHessian from_diagonal(const std::vector<double>& diag);

  int num_blocks() const { return static_cast<int>(size_.size()); }
  int dim() const { return dim_; }
  int block_size(int i) const { return size_[i]; }
  int block_begin(int i) const { return start_[i]; }

  // Throws ValueError unless the block is symmetric positive definite.
  void set_block(int i, const Eigen::MatrixXd& Hi);
  void set_scalar(int i, double h);

  Eigen::Map<const Eigen::MatrixXd> block(int i) const { return view(h_, i); }
  Eigen::Map<const Eigen::MatrixXd> inverse(int i) const { return view(inv_, i); }
  Eigen::Map<const Eigen::MatrixXd> sqrt(int i) const { return view(sq_, i); }
  Eigen::Map<const Eigen::MatrixXd> inv_sqrt(int i) const { return view(isq_, i); }
  // scalar fast paths for size-1 blocks
  double scalar(int i) const { return h_[off_[i]]; }

  std::vector<double> apply(const std::vector<double>& x) const { return mul(h_, x); }
  std::vector<double> apply_inverse(const std::vector<double>& x) const { return mul(inv_, x); }
  std::vector<double> apply_sqrt(const std::vector<double>& x) const { return mul(sq_, x); }
  std::vector<double> apply_inv_sqrt(const std::vector<double>& x) const { return mul(isq_, x); }

 private:
  Eigen::Map<const Eigen::MatrixXd> view(const std::vector<double>& v, int i) const {
    return {v.data() + off_[i], size_[i], size_[i]};
  }
  std::vector<double> mul(const std::vector<double>& m, const std::vector<double>& x) const;

  int dim_ = 0;
  std::vector<int> size_, start_, off_;
  std::vector<double> h_, inv_, sq_, isq_;
};

// Dense rows-by-rows M = A H^{-1} A^T restricted to the lower triangle as
// triplets (row >= col).  Used by tests and the factorization.
std::vector<Triplet> normal_matrix_lower(const SparseMatrix& A, const DiagonalBlockHessian& H);

// Lower triangular factor of A H^{-1} A^T.  Vertices of the elimination tree
// are elimination positions (parent(v) > v), A's rows are already permuted.
// Column j is stored densely over its root path P(j): slot k holds the entry
// in the row of the k-th ancestor of j, so the fill stays on P(j).
class CholeskyFactor {
 public:
  struct UpdateSummary {
    std::vector<int> changed;                    // columns that changed, ascending
    std::vector<std::vector<double>> old_cols;   // their path values before the update
    int low = -1;
    uint64_t version = 0;                        // version after the update
  };

  CholeskyFactor() = default;
  static CholeskyFactor factorize(const SparseMatrix& A, const DiagonalBlockHessian& H,
                                  const EliminationTree& T);

  int dim() const { return static_cast<int>(parent_.size()); }
  uint64_t version() const { return version_; }
  int parent(int v) const { return parent_[v]; }
  int depth(int v) const { return depth_[v]; }
  int height() const { return height_; }

  // path values of column j (slot 0 is the diagonal)
  const std::vector<double>& column(int j) const { return col_[j]; }
  double entry(int i, int j) const;
  // rows with a nonzero in column j, ascending
  std::vector<int> pattern(int j) const;
  long nnz() const;

  // M <- M + sign * w w^T.  w's pattern must lie on one root path.
  UpdateSummary rank_one_update(const SparseVec& w, int sign, bool keep_old = false);
  // Replace block i of H: applies A_i (Hnew^-1 - Hold^-1) A_i^T as <= 2 n_i rank-1 changes.
  UpdateSummary update_block(const SparseMatrix& A, int block, const Eigen::MatrixXd& H_old,
                             const Eigen::MatrixXd& H_new, bool keep_old = false);

  // L x = v
  SparseVec solve_lower(const SparseVec& v) const;
  std::vector<double> solve_lower_dense(std::vector<double> v) const;
  // L^T z = y
  std::vector<double> solve_upper_dense(std::vector<double> y) const;
  // (L^-T y) restricted to S; S must lie on one root path.  Only P(low(S)) is read.
  std::vector<double> solve_upper_restricted(const std::vector<double>& y, const std::vector<int>& S) const;
  // (L^-T y) on the whole path P(v), ordered from v to the root
  std::vector<double> solve_upper_path(const std::vector<double>& y, int v) const;
  double solve_upper_coordinate(const std::vector<double>& v, int i) const;
  std::vector<double> multiply_lower(const std::vector<double>& x) const;
  std::vector<double> multiply_upper(const std::vector<double>& x) const;

  // History of overwritten columns for reads at past versions.
  void set_recording(bool on) { recording_ = on; }
  bool recording() const { return recording_; }
  std::vector<double> historical_column(int j, uint64_t t) const;
  uint64_t column_since(int j) const { return since_[j]; }
  // forget all recorded snapshots (live columns stay)
  void clear_history();

  Eigen::MatrixXd dense() const;
  int low_of(const std::vector<int>& pattern) const;  // throws StructuralError off-path
  std::vector<int> path(int v) const;

 private:
  void overwrite(int j, std::vector<double> values);

  std::vector<int> parent_, depth_;
  int height_ = 0;
  std::vector<std::vector<double>> col_;
  uint64_t version_ = 0;
  bool recording_ = false;
  std::vector<uint64_t> since_;
  struct Snapshot {
    uint64_t since;
    std::vector<double> values;
  };
  std::vector<std::vector<Snapshot>> history_;
};


// A with rows permuted into elimination order, plus the relabelled tree.
struct OrderedSystem {
  SparseMatrix A;          // rows in elimination order
  EliminationTree T;       // vertices are elimination positions
  std::vector<int> perm;   // perm[original row] = position
};

OrderedSystem order_system(const SparseMatrix& A, const TreeDecomposition& td);

}  // namespace twlp
