#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twlp/sparse.hpp"

namespace twlp {

struct TreeDecomposition {
  int num_vertices = 0;
  std::vector<std::vector<int>> bags;  // each sorted ascending
  std::vector<std::pair<int, int>> edges;

  int width() const;  // max bag size - 1 (-1 when there are no bags)
};

// nullopt when G and TD satisfy all decomposition axioms, otherwise a message
// naming the failed axiom and a witness.
std::optional<std::string> check_td(const Graph& G, const TreeDecomposition& td);
// Throws StructuralError with the check_td message.
void validate_td(const Graph& G, const TreeDecomposition& td);

// PACE 2017 .td text: "s td B W+1 N", "b id v...", "id1 id2"; 1-indexed.
TreeDecomposition read_pace_td(std::istream& in);
TreeDecomposition read_pace_td_file(const std::string& path);
void write_pace_td(std::ostream& out, const TreeDecomposition& td);

// An induced subproblem: local graph + decomposition, with local -> global ids.
struct SubProblem {
  Graph g;
  TreeDecomposition td;
  std::vector<int> global;
};

struct Separator {
  std::vector<int> S;            // global ids, ascending
  std::vector<SubProblem> parts;  // at most two, each a union of components of G - S
  std::vector<std::vector<int>> components;  // global ids of every component of G - S
};

Separator balanced_separator_from_td(const SubProblem& sp);
Separator balanced_separator_from_td(const Graph& G, const TreeDecomposition& td);

// Normalizes a decomposition: drops empty bags, merges bags contained in a
// neighbour, and links a forest into one tree.
TreeDecomposition normalize_td(const TreeDecomposition& td);

class EliminationTree {
 public:
  EliminationTree() = default;
  // parent[v] == -1 marks the root; order[v] is the elimination position.
  EliminationTree(std::vector<int> parent, std::vector<int> order);

  int size() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int height() const { return height_; }
  int parent(int v) const { return parent_[v]; }
  int depth(int v) const { return depth_[v]; }
  int order(int v) const { return order_[v]; }
  int subtree_size(int v) const { return size_[v]; }
  const std::vector<int>& parents() const { return parent_; }
  const std::vector<int>& orders() const { return order_; }
  const std::vector<int>& children(int v) const { return children_[v]; }
  bool is_ancestor(int u, int v) const { return tin_[u] <= tin_[v] && tout_[v] <= tout_[u]; }

  // heavy-light order and its inverse
  const std::vector<int>& sigma() const { return sigma_; }
  int sigma_pos(int v) const { return sigma_pos_[v]; }

  // Same tree with every vertex renamed to its elimination position, so
  // parent(v) > v holds for all non-root v.
  EliminationTree relabeled() const;

 private:
  std::vector<int> parent_, order_, depth_, size_, tin_, tout_, sigma_, sigma_pos_;
  std::vector<std::vector<int>> children_;
  int root_ = -1;
  int height_ = 0;
};

EliminationTree make_elim_order_and_tree(const Graph& G, const TreeDecomposition& td, int f_tau);
// f(tau) = tau + 1
EliminationTree make_elim_order_and_tree(const Graph& G, const TreeDecomposition& td);

std::vector<int> path_to_root(const EliminationTree& T, int v);
bool is_ancestor(const EliminationTree& T, int u, int v);
// Deepest vertex of a pattern lying on one root path.
int low(const EliminationTree& T, const std::vector<int>& pattern);
// Heavy child first DFS preorder.
std::vector<int> heavy_light_order(const EliminationTree& T);
// Number of maximal contiguous runs of sigma positions the vertex set occupies.
int count_sigma_runs(const EliminationTree& T, const std::vector<int>& vertices);
int height_bound(int tau, int d, int f_tau);

// Complete binary tree over the d positions of sigma, heap numbered from 1
// (children 2v, 2v+1), bottom level filled from the left.  Node v covers the
// sigma interval [lo(v), hi(v)).
class BalancedBinaryTree {
 public:
  BalancedBinaryTree() = default;
  explicit BalancedBinaryTree(int d);
  int num_leaves() const { return d_; }
  int num_nodes() const { return 2 * d_ - 1; }
  int root() const { return 1; }
  bool is_leaf(int v) const { return v >= d_; }
  int parent(int v) const { return v / 2; }
  int left(int v) const { return 2 * v; }
  int right(int v) const { return 2 * v + 1; }
  int lo(int v) const { return lo_[v]; }
  int hi(int v) const { return hi_[v]; }
  int leaf_at(int pos) const { return leaf_[pos]; }
  int depth(int v) const;
  int height() const;
  int lca(int a, int b) const;
  // lowest node whose interval contains [l, r)
  int cover(int l, int r) const;

 private:
  int d_ = 0;
  std::vector<int> lo_, hi_, leaf_;
};

struct LambdaSets {
  BalancedBinaryTree B;
  std::vector<std::vector<int>> lambda;  // per B node, ascending tree vertices
  std::vector<int> club;                 // per tree vertex, a B node
  // u in lambda-bar(v)  <=>  the subtree of u sits inside v's interval
  bool in_lambda_bar(const EliminationTree& T, int u, int v) const {
    int p = T.sigma_pos(u);
    return B.lo(v) <= p && p + T.subtree_size(u) <= B.hi(v);
  }
};

LambdaSets lambda_sets(const EliminationTree& T);
// Explicit lambda-bar(v): union of root paths over v's interval, minus lambda(v).
std::vector<int> lambda_bar(const EliminationTree& T, const LambdaSets& ls, int v);

}  // namespace twlp
