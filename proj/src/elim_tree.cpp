#include "twlp/elim_tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "twlp/errors.hpp"

namespace twlp {

namespace {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(static_cast<size_t>(n)) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    p[b] = a;
    return true;
  }
};

}  // namespace

int TreeDecomposition::width() const {
  int w = -1;
  for (const auto& b : bags) w = std::max(w, static_cast<int>(b.size()) - 1);
  return w;
}

std::optional<std::string> check_td(const Graph& G, const TreeDecomposition& td) {
  const int nb = static_cast<int>(td.bags.size());
  if (td.num_vertices != G.n)
    return "decomposition covers " + std::to_string(td.num_vertices) + " vertices, graph has " +
           std::to_string(G.n);
  for (int b = 0; b < nb; ++b)
    for (int v : td.bags[b])
      if (v < 0 || v >= G.n) return "bag " + std::to_string(b) + " holds unknown vertex " + std::to_string(v);
  Dsu dsu(nb);
  for (auto [a, b] : td.edges) {
    if (a < 0 || b < 0 || a >= nb || b >= nb)
      return "tree edge (" + std::to_string(a) + "," + std::to_string(b) + ") names a missing bag";
    if (!dsu.unite(a, b))
      return "tree edges contain a cycle through (" + std::to_string(a) + "," + std::to_string(b) + ")";
  }

  std::vector<std::vector<int>> occ(static_cast<size_t>(G.n));
  for (int b = 0; b < nb; ++b)
    for (int v : td.bags[b]) occ[v].push_back(b);
  // axiom 1: vertex coverage
  for (int v = 0; v < G.n; ++v)
    if (occ[v].empty()) return "axiom 1 (vertex coverage) fails: vertex " + std::to_string(v) + " is in no bag";
  // axiom 2: occurrences connected; in a forest, k bags are connected iff k-1 edges join them
  std::vector<int> inner(static_cast<size_t>(G.n), 0);
  for (auto [a, b] : td.edges) {
    const auto& A = td.bags[a];
    const auto& B = td.bags[b];
    std::vector<int> common;
    std::set_intersection(A.begin(), A.end(), B.begin(), B.end(), std::back_inserter(common));
    for (int v : common) ++inner[v];
  }
  for (int v = 0; v < G.n; ++v)
    if (inner[v] != static_cast<int>(occ[v].size()) - 1)
      return "axiom 2 (connected occurrences) fails: bags holding vertex " + std::to_string(v) +
             " are disconnected";
  // axiom 3: edge coverage
  for (int u = 0; u < G.n; ++u)
    for (int v : G.adj[u]) {
      if (v < u) continue;
      bool ok = false;
      for (int b : occ[u])
        if (std::binary_search(td.bags[b].begin(), td.bags[b].end(), v)) {
          ok = true;
          break;
        }
      if (!ok)
        return "axiom 3 (edge coverage) fails: edge (" + std::to_string(u) + "," + std::to_string(v) +
               ") is in no bag";
    }
  return std::nullopt;
}

void validate_td(const Graph& G, const TreeDecomposition& td) {
  if (auto msg = check_td(G, td)) throw StructuralError(*msg);
}

TreeDecomposition read_pace_td(std::istream& in) {
  TreeDecomposition td;
  std::string line;
  int lineno = 0;
  int nbags = -1, declared = -1;
  std::vector<char> seen;
  auto fail = [&](const std::string& what, int col) {
    throw InputError("td:" + std::to_string(lineno) + ":" + std::to_string(col) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == 'c') continue;
    std::istringstream ls(line);
    if (line[first] == 's') {
      std::string s, t;
      int n = -1;
      ls >> s >> t >> nbags >> declared >> n;
      if (t != "td" || !ls || nbags < 0 || declared < 0 || n < 0) fail("bad solution line", static_cast<int>(first) + 1);
      td.num_vertices = n;
      td.bags.assign(static_cast<size_t>(nbags), {});
      seen.assign(static_cast<size_t>(nbags), 0);
      continue;
    }
    if (nbags < 0) fail("content before 's td' line", static_cast<int>(first) + 1);
    if (line[first] == 'b') {
      std::string b;
      int id = 0;
      ls >> b >> id;
      if (!ls || id < 1 || id > nbags) fail("bad bag id", static_cast<int>(first) + 3);
      if (seen[id - 1]) fail("duplicate bag " + std::to_string(id), static_cast<int>(first) + 3);
      seen[id - 1] = 1;
      int v;
      auto& bag = td.bags[id - 1];
      while (ls >> v) {
        if (v < 1 || v > td.num_vertices) fail("vertex " + std::to_string(v) + " out of range", static_cast<int>(first) + 1);
        bag.push_back(v - 1);
      }
      if (!ls.eof()) fail("non-integer token in bag", static_cast<int>(first) + 1);
      std::sort(bag.begin(), bag.end());
      bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
      continue;
    }
    int a = 0, b = 0;
    ls >> a >> b;
    if (!ls || a < 1 || b < 1 || a > nbags || b > nbags) fail("bad tree edge", static_cast<int>(first) + 1);
    td.edges.emplace_back(a - 1, b - 1);
  }
  if (nbags < 0) throw InputError("td: missing 's td' line");
  if (td.width() + 1 > declared)
    throw InputError("td: bag of size " + std::to_string(td.width() + 1) + " exceeds declared " +
                     std::to_string(declared));
  return td;
}

TreeDecomposition read_pace_td_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  return read_pace_td(f);
}

void write_pace_td(std::ostream& out, const TreeDecomposition& td) {
  out << "s td " << td.bags.size() << " " << td.width() + 1 << " " << td.num_vertices << "\n";
  for (size_t b = 0; b < td.bags.size(); ++b) {
    out << "b " << b + 1;
    for (int v : td.bags[b]) out << " " << v + 1;
    out << "\n";
  }
  for (auto [a, b] : td.edges) out << a + 1 << " " << b + 1 << "\n";
}

TreeDecomposition normalize_td(const TreeDecomposition& td) {
  const int nb = static_cast<int>(td.bags.size());
  std::vector<std::vector<int>> adj(static_cast<size_t>(nb));
  for (auto [a, b] : td.edges) {
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> alive(static_cast<size_t>(nb), 1);
  for (int b = 0; b < nb; ++b) alive[b] = !td.bags[b].empty();
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  // absorb bags contained in a neighbour; the neighbour inherits the edges
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < nb; ++a) {
      if (!alive[a]) continue;
      for (int b : adj[a]) {
        if (!alive[b]) continue;
        const auto& A = td.bags[a];
        const auto& B = td.bags[b];
        if (!std::includes(B.begin(), B.end(), A.begin(), A.end())) continue;
        for (int c : adj[a]) {
          if (c == b) continue;
          adj[c].erase(std::remove(adj[c].begin(), adj[c].end(), a), adj[c].end());
          if (!std::binary_search(adj[c].begin(), adj[c].end(), b)) {
            adj[c].insert(std::lower_bound(adj[c].begin(), adj[c].end(), b), b);
            adj[b].insert(std::lower_bound(adj[b].begin(), adj[b].end(), c), c);
          }
        }
        adj[b].erase(std::remove(adj[b].begin(), adj[b].end(), a), adj[b].end());
        adj[a].clear();
        alive[a] = 0;
        changed = true;
        break;
      }
    }
  }
  std::vector<int> id(static_cast<size_t>(nb), -1);
  TreeDecomposition out;
  out.num_vertices = td.num_vertices;
  for (int b = 0; b < nb; ++b)
    if (alive[b]) {
      id[b] = static_cast<int>(out.bags.size());
      out.bags.push_back(td.bags[b]);
    }
  const int m = static_cast<int>(out.bags.size());
  Dsu dsu(m);
  for (int a = 0; a < nb; ++a) {
    if (!alive[a]) continue;
    for (int b : adj[a])
      if (alive[b] && a < b && dsu.unite(id[a], id[b])) out.edges.emplace_back(id[a], id[b]);
  }
  // dropping bags can split the tree; linking the pieces keeps every axiom
  for (int b = 1; b < m; ++b)
    if (dsu.unite(0, b)) out.edges.emplace_back(0, b);
  return out;
}

Separator balanced_separator_from_td(const SubProblem& sp) {
  Separator out;
  const int n = sp.g.n;
  if (n == 0) return out;
  TreeDecomposition td = normalize_td(sp.td);
  const int nb = static_cast<int>(td.bags.size());
  if (nb == 0) throw StructuralError("decomposition has no bags");

  std::vector<std::vector<int>> tadj(static_cast<size_t>(nb));
  for (auto [a, b] : td.edges) {
    tadj[a].push_back(b);
    tadj[b].push_back(a);
  }
  std::vector<int> bfs{0}, tpar(static_cast<size_t>(nb), -1);
  std::vector<char> vis(static_cast<size_t>(nb), 0);
  vis[0] = 1;
  for (size_t i = 0; i < bfs.size(); ++i)
    for (int c : tadj[bfs[i]])
      if (!vis[c]) {
        vis[c] = 1;
        tpar[c] = bfs[i];
        bfs.push_back(c);
      }
  // each vertex charged to the first bag (BFS order) holding it
  std::vector<long> w(static_cast<size_t>(nb), 0);
  std::vector<char> charged(static_cast<size_t>(n), 0);
  for (int b : bfs)
    for (int v : td.bags[b])
      if (!charged[v]) {
        charged[v] = 1;
        ++w[b];
      }
  std::vector<long> sub = w;
  for (size_t i = bfs.size(); i-- > 1;) sub[tpar[bfs[i]]] += sub[bfs[i]];
  const long W = sub[0];
  int t = 0;
  for (;;) {
    int next = -1;
    for (int c : tadj[t])
      if (c != tpar[t] && 2 * sub[c] > W && (next < 0 || c < next)) next = c;
    if (next < 0) break;
    t = next;
  }

  std::vector<char> inS(static_cast<size_t>(n), 0);
  for (int v : td.bags[t]) inS[v] = 1;
  for (int v : td.bags[t]) out.S.push_back(sp.global[v]);
  std::sort(out.S.begin(), out.S.end());

  std::vector<int> comp(static_cast<size_t>(n), -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (inS[s] || comp[s] >= 0) continue;
    std::vector<int> q{s};
    comp[s] = static_cast<int>(comps.size());
    for (size_t i = 0; i < q.size(); ++i)
      for (int u : sp.g.adj[q[i]])
        if (!inS[u] && comp[u] < 0) {
          comp[u] = comp[s];
          q.push_back(u);
        }
    std::sort(q.begin(), q.end());
    comps.push_back(std::move(q));
  }
  auto min_global = [&](const std::vector<int>& c) {
    int m = sp.global[c[0]];
    for (int v : c) m = std::min(m, sp.global[v]);
    return m;
  };
  std::vector<int> idx(comps.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (comps[a].size() != comps[b].size()) return comps[a].size() > comps[b].size();
    return min_global(comps[a]) < min_global(comps[b]);
  });
  std::vector<int> group[2];
  for (int c : idx) {
    int g = group[1].size() < group[0].size() ? 1 : 0;
    group[g].insert(group[g].end(), comps[c].begin(), comps[c].end());
  }
  for (const auto& c : comps) {
    std::vector<int> gl;
    for (int v : c) gl.push_back(sp.global[v]);
    std::sort(gl.begin(), gl.end());
    out.components.push_back(std::move(gl));
  }

  for (auto& part : group) {
    if (part.empty()) continue;
    std::sort(part.begin(), part.end());
    std::vector<int> loc(static_cast<size_t>(n), -1);
    for (size_t i = 0; i < part.size(); ++i) loc[part[i]] = static_cast<int>(i);
    SubProblem p;
    const int k = static_cast<int>(part.size());
    p.g = Graph(k);
    for (int i = 0; i < k; ++i) {
      for (int u : sp.g.adj[part[i]])
        if (loc[u] >= 0) p.g.adj[i].push_back(loc[u]);
      std::sort(p.g.adj[i].begin(), p.g.adj[i].end());
      p.global.push_back(sp.global[part[i]]);
    }
    p.td.num_vertices = k;
    for (const auto& bag : td.bags) {
      std::vector<int> nbag;
      for (int v : bag)
        if (loc[v] >= 0) nbag.push_back(loc[v]);
      std::sort(nbag.begin(), nbag.end());
      p.td.bags.push_back(std::move(nbag));
    }
    p.td.edges = td.edges;
    p.td = normalize_td(p.td);
    out.parts.push_back(std::move(p));
  }
  std::sort(out.parts.begin(), out.parts.end(),
            [](const SubProblem& a, const SubProblem& b) { return a.global[0] < b.global[0]; });
  return out;
}

Separator balanced_separator_from_td(const Graph& G, const TreeDecomposition& td) {
  validate_td(G, td);
  SubProblem sp{G, td, {}};
  sp.global.resize(static_cast<size_t>(G.n));
  std::iota(sp.global.begin(), sp.global.end(), 0);
  return balanced_separator_from_td(sp);
}

EliminationTree::EliminationTree(std::vector<int> parent, std::vector<int> order)
    : parent_(std::move(parent)), order_(std::move(order)) {
  const int n = size();
  if (static_cast<int>(order_.size()) != n) throw StructuralError("order length mismatch");
  children_.assign(static_cast<size_t>(n), {});
  for (int v = 0; v < n; ++v) {
    int p = parent_[v];
    if (p < 0) {
      if (root_ >= 0) throw StructuralError("elimination tree has two roots");
      root_ = v;
    } else {
      if (p >= n || p == v) throw StructuralError("bad parent index");
      children_[p].push_back(v);
    }
  }
  if (n > 0 && root_ < 0) throw StructuralError("elimination tree has no root");
  depth_.assign(static_cast<size_t>(n), 0);
  size_.assign(static_cast<size_t>(n), 1);
  std::vector<int> bfs;
  if (n > 0) {
    bfs.push_back(root_);
    depth_[root_] = 1;
  }
  for (size_t i = 0; i < bfs.size(); ++i)
    for (int c : children_[bfs[i]]) {
      depth_[c] = depth_[bfs[i]] + 1;
      bfs.push_back(c);
    }
  if (static_cast<int>(bfs.size()) != n) throw StructuralError("parent array contains a cycle");
  for (size_t i = bfs.size(); i-- > 1;) size_[parent_[bfs[i]]] += size_[bfs[i]];
  for (int v : bfs) height_ = std::max(height_, depth_[v]);
  sigma_ = heavy_light_order(*this);
  sigma_pos_.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) sigma_pos_[sigma_[i]] = i;
  tin_ = sigma_pos_;
  tout_.resize(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) tout_[v] = tin_[v] + size_[v] - 1;
}

EliminationTree EliminationTree::relabeled() const {
  const int n = size();
  std::vector<int> p(static_cast<size_t>(n), -1), o(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    if (parent_[v] >= 0) p[order_[v]] = order_[parent_[v]];
    o[v] = v;
  }
  return EliminationTree(std::move(p), std::move(o));
}

namespace {

// Appends the elimination order of sp to `order`, writes parents, returns top vertex.
int build_recursive(const SubProblem& sp, int f_tau, std::vector<int>& parent, std::vector<int>& order) {
  auto chain = [&](std::vector<int> vs) {
    std::sort(vs.begin(), vs.end());
    for (size_t i = 0; i + 1 < vs.size(); ++i) parent[vs[i]] = vs[i + 1];
    for (int v : vs) order.push_back(v);
    return vs;
  };
  if (sp.g.n <= f_tau) return chain(sp.global).back();
  Separator sep = balanced_separator_from_td(sp);
  std::vector<int> tops;
  for (const auto& part : sep.parts) tops.push_back(build_recursive(part, f_tau, parent, order));
  auto S = chain(sep.S);
  for (int r : tops) parent[r] = S.front();
  return S.back();
}

}  // namespace

EliminationTree make_elim_order_and_tree(const Graph& G, const TreeDecomposition& td, int f_tau) {
  validate_td(G, td);
  if (f_tau < 1) throw StructuralError("recursion base size must be positive");
  const int n = G.n;
  std::vector<int> parent(static_cast<size_t>(n), -1), seq;
  if (n == 0) return EliminationTree({}, {});
  SubProblem sp{G, td, {}};
  sp.global.resize(static_cast<size_t>(n));
  std::iota(sp.global.begin(), sp.global.end(), 0);
  int top = build_recursive(sp, f_tau, parent, seq);
  parent[top] = -1;
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[seq[i]] = i;
  return EliminationTree(std::move(parent), std::move(order));
}

EliminationTree make_elim_order_and_tree(const Graph& G, const TreeDecomposition& td) {
  return make_elim_order_and_tree(G, td, std::max(td.width(), 0) + 1);
}

std::vector<int> path_to_root(const EliminationTree& T, int v) {
  std::vector<int> p;
  for (; v >= 0; v = T.parent(v)) p.push_back(v);
  return p;
}

bool is_ancestor(const EliminationTree& T, int u, int v) { return T.is_ancestor(u, v); }

int low(const EliminationTree& T, const std::vector<int>& pattern) {
  if (pattern.empty()) throw StructuralError("low of an empty pattern");
  int best = pattern[0];
  for (int v : pattern)
    if (T.depth(v) > T.depth(best)) best = v;
  for (int v : pattern)
    if (!T.is_ancestor(v, best)) throw StructuralError("pattern does not lie on one root path");
  return best;
}

std::vector<int> heavy_light_order(const EliminationTree& T) {
  const int n = T.size();
  std::vector<int> out;
  out.reserve(static_cast<size_t>(n));
  if (n == 0) return out;
  std::vector<int> st{T.root()};
  while (!st.empty()) {
    int v = st.back();
    st.pop_back();
    out.push_back(v);
    std::vector<int> ch = T.children(v);
    std::sort(ch.begin(), ch.end(), [&](int a, int b) {
      if (T.subtree_size(a) != T.subtree_size(b)) return T.subtree_size(a) > T.subtree_size(b);
      return a < b;
    });
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) st.push_back(*it);
  }
  return out;
}

int count_sigma_runs(const EliminationTree& T, const std::vector<int>& vertices) {
  std::vector<int> pos;
  for (int v : vertices) pos.push_back(T.sigma_pos(v));
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  int runs = 0;
  for (size_t i = 0; i < pos.size(); ++i)
    if (i == 0 || pos[i] != pos[i - 1] + 1) ++runs;
  return runs;
}

int height_bound(int tau, int d, int f_tau) {
  int lg = d <= 1 ? 0 : static_cast<int>(std::ceil(std::log(static_cast<double>(d)) / std::log(1.5) - 1e-12));
  return (tau + 1) * (lg + 1) + f_tau;
}

BalancedBinaryTree::BalancedBinaryTree(int d) : d_(d) {
  if (d <= 0) return;
  lo_.assign(static_cast<size_t>(2 * d), 0);
  hi_.assign(static_cast<size_t>(2 * d), 0);
  leaf_.assign(static_cast<size_t>(d), 0);
  int pos = 0;
  std::vector<int> st{1};
  while (!st.empty()) {
    int v = st.back();
    st.pop_back();
    if (v >= d) {
      leaf_[pos] = v;
      lo_[v] = pos;
      hi_[v] = pos + 1;
      ++pos;
    } else {
      st.push_back(2 * v + 1);
      st.push_back(2 * v);
    }
  }
  for (int v = d - 1; v >= 1; --v) {
    lo_[v] = lo_[2 * v];
    hi_[v] = hi_[2 * v + 1];
  }
}

int BalancedBinaryTree::depth(int v) const {
  int k = 0;
  while (v > 1) {
    v >>= 1;
    ++k;
  }
  return k;
}

int BalancedBinaryTree::height() const { return d_ == 0 ? 0 : depth(2 * d_ - 1) + 1; }

int BalancedBinaryTree::lca(int a, int b) const {
  int da = depth(a), db = depth(b);
  while (da > db) {
    a >>= 1;
    --da;
  }
  while (db > da) {
    b >>= 1;
    --db;
  }
  while (a != b) {
    a >>= 1;
    b >>= 1;
  }
  return a;
}

int BalancedBinaryTree::cover(int l, int r) const { return lca(leaf_[l], leaf_[r - 1]); }

namespace {

int tree_lca(const EliminationTree& T, int a, int b) {
  while (T.depth(a) > T.depth(b)) a = T.parent(a);
  while (T.depth(b) > T.depth(a)) b = T.parent(b);
  while (a != b) {
    a = T.parent(a);
    b = T.parent(b);
  }
  return a;
}

}  // namespace

LambdaSets lambda_sets(const EliminationTree& T) {
  LambdaSets ls;
  const int d = T.size();
  ls.B = BalancedBinaryTree(d);
  ls.lambda.assign(static_cast<size_t>(std::max(2 * d, 1)), {});
  const auto& sg = T.sigma();
  for (int v = 1; v < 2 * d; ++v) {
    auto& L = ls.lambda[v];
    int l = ls.B.lo(v), h = ls.B.hi(v);
    // only the two boundary pairs can share ancestors with the outside
    if (l > 0)
      for (int u : path_to_root(T, tree_lca(T, sg[l - 1], sg[l]))) L.push_back(u);
    if (h < d)
      for (int u : path_to_root(T, tree_lca(T, sg[h - 1], sg[h]))) L.push_back(u);
    std::sort(L.begin(), L.end());
    L.erase(std::unique(L.begin(), L.end()), L.end());
  }
  ls.club.assign(static_cast<size_t>(d), 1);
  for (int u = 0; u < d; ++u) {
    int p = T.sigma_pos(u);
    ls.club[u] = ls.B.cover(p, p + T.subtree_size(u));
  }
  return ls;
}

std::vector<int> lambda_bar(const EliminationTree& T, const LambdaSets& ls, int v) {
  std::vector<char> mark(static_cast<size_t>(T.size()), 0);
  std::vector<int> in;
  for (int p = ls.B.lo(v); p < ls.B.hi(v); ++p)
    for (int u = T.sigma()[p]; u >= 0 && !mark[u]; u = T.parent(u)) {
      mark[u] = 1;
      in.push_back(u);
    }
  std::sort(in.begin(), in.end());
  std::vector<int> out;
  std::set_difference(in.begin(), in.end(), ls.lambda[v].begin(), ls.lambda[v].end(), std::back_inserter(out));
  return out;
}

}  // namespace twlp
