#include <algorithm>
#include <set>

#include "doctest.h"
#include "twlp/errors.hpp"
#include "twlp/lp.hpp"
#include "twlp/rng.hpp"
#include "twlp/sparse.hpp"

using namespace twlp;

TEST_CASE("build_csc basics") {
  auto Z = build_csc({}, 2, std::vector<int>{1, 1});
  CHECK(Z.rows() == 2);
  CHECK(Z.cols() == 2);
  CHECK(Z.nnz() == 0);

  auto D = build_csc({{0, 0, 1.0}, {0, 0, 1.0}}, 1, 1);
  REQUIRE(D.nnz() == 1);
  CHECK(D.col_vals(0)[0] == 2.0);

  auto C = build_csc({{0, 0, 1.0}, {0, 0, -1.0}}, 1, 1);
  CHECK(C.nnz() == 0);

  auto P = build_csc({{0, 0, 1}, {1, 0, 1}, {0, 1, 1}}, 2, std::vector<int>{1, 1});
  CHECK(P.block_pattern(0) == std::vector<int>{0, 1});
  CHECK(P.block_pattern(1) == std::vector<int>{0});

  CHECK_THROWS_AS(build_csc({{2, 0, 1.0}}, 2, 1), StructuralError);
  CHECK_THROWS_AS(build_csc({{0, 0, std::nan("")}}, 2, 1), ValueError);
  CHECK_THROWS_AS(build_csc({}, 2, 3, {1, 1}), StructuralError);
}

TEST_CASE("block patterns are unions of column patterns") {
  auto A = build_csc({{1, 0, 1}, {3, 0, 2}, {3, 1, 1}, {5, 1, 1}}, 6, std::vector<int>{2});
  CHECK(column_block_pattern(A, 0) == std::vector<int>{1, 3, 5});
  CHECK_THROWS_AS(column_block_pattern(A, 1), StructuralError);
  auto E = build_csc({}, 3, std::vector<int>{1});
  CHECK(column_block_pattern(E, 0).empty());

  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int d = 1 + rng.below(10), nb = 1 + rng.below(6);
    std::vector<int> bs;
    for (int b = 0; b < nb; ++b) bs.push_back(1 + rng.below(3));
    int n = 0;
    for (int s : bs) n += s;
    std::vector<Triplet> t;
    for (int k = 0; k < 3 * n; ++k) t.push_back({rng.below(d), rng.below(n), rng.uniform(-1, 1)});
    auto M = build_csc(t, d, n, bs);
    int col = 0;
    for (int b = 0; b < nb; ++b) {
      std::set<int> s;
      for (int j = col; j < col + bs[b]; ++j)
        for (int r : M.col_rows(j)) s.insert(r);
      col += bs[b];
      CHECK(std::vector<int>(s.begin(), s.end()) == M.block_pattern(b));
    }
    for (int j = 0; j < n; ++j) {
      auto r = M.col_rows(j);
      CHECK(std::is_sorted(r.begin(), r.end()));
      CHECK(std::adjacent_find(r.begin(), r.end()) == r.end());
    }
    // round trip
    auto M2 = build_csc(M.to_triplets(), d, n, bs);
    CHECK(M2.to_triplets().size() == M.to_triplets().size());
    for (int j = 0; j < n; ++j) {
      auto a = M.col_vals(j), b = M2.col_vals(j);
      CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
  }
}

TEST_CASE("dual graph") {
  auto I = build_csc({{0, 0, 1}, {1, 1, 1}}, 2, 2);
  CHECK(dual_graph(I).num_edges() == 0);

  auto P = build_csc({{0, 0, 1}, {1, 0, -1}, {1, 1, 1}, {2, 1, -1}}, 3, 2);
  auto G = dual_graph(P);
  CHECK(G.num_edges() == 2);
  CHECK(G.has_edge(0, 1));
  CHECK(G.has_edge(1, 2));
  CHECK(!G.has_edge(0, 2));

  auto K = build_csc({{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}}, 4, 1);
  CHECK(dual_graph(K).num_edges() == 6);

  // brute force overlap oracle plus scaling invariance
  for (unsigned long long seed = 1; seed <= 20; ++seed) {
    auto inst = generate_instance(InstanceKind::RandomTw, 12, seed, 3);
    auto A = inst.lp.matrix();
    auto G1 = dual_graph(A);
    auto t = A.to_triplets();
    for (auto& e : t)
      if (e.col % 2 == 0) e.val *= -3.5;
    auto G2 = dual_graph(build_csc(t, A.rows(), A.cols()));
    CHECK(G1.adj == G2.adj);
    for (int u = 0; u < A.rows(); ++u)
      for (int v = 0; v < A.rows(); ++v) {
        if (u == v) continue;
        bool share = false;
        for (int j = 0; j < A.cols(); ++j) {
          auto r = A.col_rows(j);
          if (std::count(r.begin(), r.end(), u) && std::count(r.begin(), r.end(), v)) share = true;
        }
        CHECK(G1.has_edge(u, v) == share);
      }
    CHECK(G1.num_edges() <= static_cast<long>(A.rows()) * 3);
  }
}

TEST_CASE("multiply and norms") {
  auto A = build_csc({{0, 0, 1}, {1, 0, 2}, {1, 1, 3}}, 2, 2);
  auto y = A.multiply(std::vector<double>{1, 1});
  CHECK(y == std::vector<double>{1, 5});
  auto x = A.multiply_transpose(std::vector<double>{1, 1});
  CHECK(x == std::vector<double>{3, 3});
  CHECK(A.frobenius_norm() == doctest::Approx(std::sqrt(14.0)));
  // [[1,0],[2,3]] has largest singular value sqrt(7+sqrt(40))
  CHECK(A.norm2_estimate() == doctest::Approx(std::sqrt(7 + std::sqrt(40.0))).epsilon(1e-9));
}
