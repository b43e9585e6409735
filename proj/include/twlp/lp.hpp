#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twlp/elim_tree.hpp"
#include "twlp/sparse.hpp"

namespace twlp {

// min c^T x  s.t.  A x = b,  l <= x <= u
struct LpProblem {
  int d = 0;  // rows
  int n = 0;  // columns
  std::vector<Triplet> entries;
  std::vector<double> b, c, lower, upper;
  std::vector<int> block_sizes;  // empty: all ones
  std::optional<double> radius;  // inner radius r

  SparseMatrix matrix() const;
  // Throws InputError when dimensions, bounds or values are inconsistent.
  void validate() const;
};

// Line oriented text format, 0-indexed, '#' starts a comment:
//   dims d n
//   obj c_0 ... c_{n-1}
//   bounds j l u
//   row i: j v j v ...
//   rhs b_0 ... b_{d-1}
//   blocks n_0 n_1 ...     (optional)
//   radius r               (optional)
// Columns without a bounds line are an error.
LpProblem parse_lp(const std::string& text);
LpProblem read_lp_file(const std::string& path);
std::string write_lp(const LpProblem& P);

enum class InstanceKind { PathFlow, GridFlow, RandomTw };
std::optional<InstanceKind> parse_instance_kind(const std::string& s);
std::string to_string(InstanceKind k);

struct Instance {
  LpProblem lp;
  TreeDecomposition td;
  std::vector<double> interior;  // a strictly interior feasible point
};

// path-flow: `size` buses on a line, one generator per bus.
// grid-flow: size x width grid (width defaults to min(size, 4)).
// random-tw: partial `width`-tree on `size` rows (width defaults to 3).
Instance generate_instance(InstanceKind kind, int size, unsigned long long seed, int width = 0);

// Random partial k-tree with an exact decomposition of width min(k, n-1).
std::pair<Graph, TreeDecomposition> random_partial_ktree(int n, int k, unsigned long long seed,
                                                         double keep = 0.7);

}  // namespace twlp
