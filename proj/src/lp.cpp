#include "twlp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "twlp/errors.hpp"
#include "twlp/rng.hpp"

namespace twlp {

SparseMatrix LpProblem::matrix() const {
  if (block_sizes.empty()) return build_csc(entries, d, n);
  return build_csc(entries, d, n, block_sizes);
}

void LpProblem::validate() const {
  auto bad = [](const std::string& m) { throw InputError(m); };
  if (d < 0 || n <= 0) bad("dimensions must be positive");
  if (static_cast<int>(b.size()) != d) bad("rhs has " + std::to_string(b.size()) + " entries, expected " + std::to_string(d));
  if (static_cast<int>(c.size()) != n) bad("obj has " + std::to_string(c.size()) + " entries, expected " + std::to_string(n));
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n) bad("bounds missing");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) bad("column " + std::to_string(j) + " has an infinite bound");
    if (!(lower[j] < upper[j])) bad("column " + std::to_string(j) + " has lower >= upper");
    if (!std::isfinite(c[j])) bad("obj entry " + std::to_string(j) + " is not finite");
  }
  for (double v : b)
    if (!std::isfinite(v)) bad("rhs entry is not finite");
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= d || e.col < 0 || e.col >= n) bad("matrix entry out of range");
    if (!std::isfinite(e.val)) bad("matrix entry is not finite");
  }
  if (!block_sizes.empty() && std::accumulate(block_sizes.begin(), block_sizes.end(), 0) != n)
    bad("block sizes do not sum to n");
  if (radius && !(*radius > 0)) bad("radius must be positive");
}

namespace {

struct LineReader {
  std::string line;
  int lineno;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(std::to_string(lineno) + ":" + std::to_string(pos + 1) + ": " + msg);
  }
  void skip() {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
  }
  bool done() {
    skip();
    return pos >= line.size();
  }
  std::string word() {
    skip();
    size_t s = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])) && line[pos] != ':') ++pos;
    return line.substr(s, pos - s);
  }
  double number() {
    skip();
    if (pos >= line.size()) fail("expected a number");
    const char* b = line.c_str() + pos;
    char* e = nullptr;
    double v = std::strtod(b, &e);
    if (e == b) fail("expected a number");
    if (!std::isfinite(v)) fail("value is not finite");
    pos += static_cast<size_t>(e - b);
    if (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])) && line[pos] != ':')
      fail("trailing characters in number");
    return v;
  }
  int index(int limit, const char* what) {
    size_t at = (skip(), pos);
    double v = number();
    if (v != std::floor(v) || v < 0 || v >= limit) {
      pos = at;
      fail(std::string(what) + " index out of range");
    }
    return static_cast<int>(v);
  }
};

}  // namespace

LpProblem parse_lp(const std::string& text) {
  LpProblem P;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool have_dims = false, have_obj = false, have_rhs = false;
  std::vector<char> bounded;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    LineReader r{raw, lineno};
    if (r.done()) continue;
    std::string kw = r.word();
    if (kw != "dims" && !have_dims) r.fail("expected 'dims' first");
    if (kw == "dims") {
      if (have_dims) r.fail("duplicate dims");
      double d = r.number(), n = r.number();
      if (d < 0 || n < 1 || d != std::floor(d) || n != std::floor(n)) r.fail("bad dimensions");
      P.d = static_cast<int>(d);
      P.n = static_cast<int>(n);
      P.lower.assign(static_cast<size_t>(P.n), 0.0);
      P.upper.assign(static_cast<size_t>(P.n), 0.0);
      bounded.assign(static_cast<size_t>(P.n), 0);
      have_dims = true;
    } else if (kw == "obj") {
      for (int j = 0; j < P.n; ++j) P.c.push_back(r.number());
      have_obj = true;
    } else if (kw == "rhs") {
      for (int i = 0; i < P.d; ++i) P.b.push_back(r.number());
      have_rhs = true;
    } else if (kw == "bounds") {
      int j = r.index(P.n, "column");
      size_t at = r.pos;
      double l = r.number(), u = r.number();
      if (!(l < u)) {
        r.pos = at;
        r.fail("lower bound " + std::to_string(l) + " is not below upper bound " + std::to_string(u));
      }
      if (bounded[j]) r.fail("duplicate bounds for column " + std::to_string(j));
      bounded[j] = 1;
      P.lower[j] = l;
      P.upper[j] = u;
    } else if (kw == "row") {
      int i = r.index(P.d, "row");
      r.skip();
      if (r.pos >= r.line.size() || r.line[r.pos] != ':') r.fail("expected ':'");
      ++r.pos;
      while (!r.done()) {
        int j = r.index(P.n, "column");
        double v = r.number();
        P.entries.push_back({i, j, v});
      }
    } else if (kw == "blocks") {
      while (!r.done()) {
        double s = r.number();
        if (s < 1 || s != std::floor(s)) r.fail("bad block size");
        P.block_sizes.push_back(static_cast<int>(s));
      }
    } else if (kw == "radius") {
      P.radius = r.number();
    } else {
      r.pos = 0;
      r.fail("unknown keyword '" + kw + "'");
    }
    if (!r.done()) r.fail("unexpected trailing tokens");
  }
  if (!have_dims) throw InputError("missing 'dims' line");
  if (!have_obj) throw InputError("missing 'obj' line");
  if (!have_rhs && P.d > 0) throw InputError("missing 'rhs' line");
  for (int j = 0; j < P.n; ++j)
    if (!bounded[j]) throw InputError("column " + std::to_string(j) + " has no bounds line");
  P.validate();
  return P;
}

LpProblem read_lp_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_lp(ss.str());
}

std::string write_lp(const LpProblem& P) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "dims " << P.d << " " << P.n << "\n";
  o << "obj";
  for (double v : P.c) o << " " << v;
  o << "\n";
  for (int j = 0; j < P.n; ++j) o << "bounds " << j << " " << P.lower[j] << " " << P.upper[j] << "\n";
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(P.d));
  for (const auto& e : P.entries) rows[e.row].emplace_back(e.col, e.val);
  for (int i = 0; i < P.d; ++i) {
    if (rows[i].empty()) continue;
    o << "row " << i << ":";
    for (auto [j, v] : rows[i]) o << " " << j << " " << v;
    o << "\n";
  }
  o << "rhs";
  for (double v : P.b) o << " " << v;
  o << "\n";
  if (!P.block_sizes.empty()) {
    o << "blocks";
    for (int s : P.block_sizes) o << " " << s;
    o << "\n";
  }
  if (P.radius) o << "radius " << *P.radius << "\n";
  return o.str();
}

std::optional<InstanceKind> parse_instance_kind(const std::string& s) {
  if (s == "path-flow") return InstanceKind::PathFlow;
  if (s == "grid-flow") return InstanceKind::GridFlow;
  if (s == "random-tw") return InstanceKind::RandomTw;
  return std::nullopt;
}

std::string to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::PathFlow: return "path-flow";
    case InstanceKind::GridFlow: return "grid-flow";
    case InstanceKind::RandomTw: return "random-tw";
  }
  return "?";
}

std::pair<Graph, TreeDecomposition> random_partial_ktree(int n, int k, unsigned long long seed, double keep) {
  Rng rng(seed);
  k = std::max(0, std::min(k, n - 1));
  TreeDecomposition td;
  td.num_vertices = n;
  std::vector<std::pair<int, int>> edges;
  auto clique_edges = [&](const std::vector<int>& bag) {
    for (size_t a = 0; a < bag.size(); ++a)
      for (size_t b = a + 1; b < bag.size(); ++b) edges.emplace_back(bag[a], bag[b]);
  };
  if (n == 0) return {Graph(0), td};
  std::vector<int> first(static_cast<size_t>(k) + 1);
  std::iota(first.begin(), first.end(), 0);
  td.bags.push_back(first);
  clique_edges(first);
  for (int v = k + 1; v < n; ++v) {
    int host = rng.below(static_cast<int>(td.bags.size()));
    std::vector<int> bag = td.bags[host];
    bag.erase(bag.begin() + rng.below(static_cast<int>(bag.size())));
    for (int u : bag) edges.emplace_back(u, v);
    bag.push_back(v);
    std::sort(bag.begin(), bag.end());
    td.edges.emplace_back(host, static_cast<int>(td.bags.size()));
    td.bags.push_back(bag);
  }
  std::vector<std::pair<int, int>> kept;
  for (auto e : edges)
    if (rng.uniform() < keep) kept.push_back(e);
  return {Graph::from_edges(n, kept), td};
}

namespace {

// Finishes an instance: bounds around a random interior point, b = A x0.
void finish(Instance& I, Rng& rng) {
  LpProblem& P = I.lp;
  I.interior.resize(static_cast<size_t>(P.n));
  for (int j = 0; j < P.n; ++j) I.interior[j] = P.lower[j] + (P.upper[j] - P.lower[j]) * rng.uniform(0.2, 0.8);
  P.b.assign(static_cast<size_t>(P.d), 0.0);
  for (const auto& e : P.entries) P.b[e.row] += e.val * I.interior[e.col];
}

}  // namespace

Instance generate_instance(InstanceKind kind, int size, unsigned long long seed, int width) {
  if (size < 2) throw InputError("instance size must be at least 2");
  Rng rng(seed ^ (static_cast<unsigned long long>(kind) << 56));
  Instance I;
  LpProblem& P = I.lp;
  auto add_col = [&](double l, double u, double c) {
    P.lower.push_back(l);
    P.upper.push_back(u);
    P.c.push_back(c);
    return P.n++;
  };
  // one generator per row keeps A full row rank
  auto add_generators = [&]() {
    for (int i = 0; i < P.d; ++i) {
      int j = add_col(0.0, rng.uniform(1.0, 3.0), rng.uniform(0.5, 2.0));
      P.entries.push_back({i, j, 1.0});
    }
  };
  auto add_line = [&](int a, int b) {
    double cap = rng.uniform(0.5, 2.0);
    int j = add_col(-cap, cap, rng.uniform(-0.1, 0.1));
    P.entries.push_back({a, j, -1.0});
    P.entries.push_back({b, j, 1.0});
  };

  if (kind == InstanceKind::PathFlow) {
    P.d = size;
    add_generators();
    for (int i = 0; i + 1 < size; ++i) add_line(i, i + 1);
    I.td.num_vertices = size;
    for (int i = 0; i + 1 < size; ++i) {
      I.td.bags.push_back({i, i + 1});
      if (i > 0) I.td.edges.emplace_back(i - 1, i);
    }
  } else if (kind == InstanceKind::GridFlow) {
    int h = width > 0 ? std::min(width, size) : std::min(size, 4);
    int w = size;
    P.d = w * h;
    add_generators();
    auto id = [h](int r, int c) { return c * h + r; };
    for (int c = 0; c < w; ++c)
      for (int r = 0; r < h; ++r) {
        if (r + 1 < h) add_line(id(r, c), id(r + 1, c));
        if (c + 1 < w) add_line(id(r, c), id(r, c + 1));
      }
    I.td.num_vertices = P.d;
    for (int s = 0; s + h < P.d; ++s) {
      std::vector<int> bag(static_cast<size_t>(h) + 1);
      std::iota(bag.begin(), bag.end(), s);
      I.td.bags.push_back(bag);
      if (s > 0) I.td.edges.emplace_back(s - 1, s);
    }
    if (I.td.bags.empty()) {
      std::vector<int> bag(static_cast<size_t>(P.d));
      std::iota(bag.begin(), bag.end(), 0);
      I.td.bags.push_back(bag);
    }
  } else {
    int k = width > 0 ? width : 3;
    auto [G, td] = random_partial_ktree(size, k, rng.bits(), 0.7);
    P.d = size;
    add_generators();
    for (int u = 0; u < G.n; ++u)
      for (int v : G.adj[u])
        if (u < v) add_line(u, v);
    // a few wider columns spanning a bag
    for (const auto& bag : td.bags) {
      if (bag.size() < 3 || rng.uniform() > 0.3) continue;
      int j = add_col(-1.0, 1.0, rng.uniform(-0.5, 0.5));
      for (int v : bag) P.entries.push_back({v, j, rng.uniform(-1.0, 1.0)});
    }
    I.td = td;
  }
  finish(I, rng);
  return I;
}

}  // namespace twlp
