#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "twlp/errors.hpp"
#include "twlp/linf.hpp"

using namespace twlp;

namespace {

int clog2(long x) {
  int k = 0;
  while ((1L << k) < x) ++k;
  return k;
}

bool is_dyadic(DyadicInterval I) {
  const int len = I.b - I.a + 1;
  return (len & (len - 1)) == 0 && (I.a - 1) % len == 0;
}

// fewest dyadic intervals partitioning [a, b], by dynamic programming
int min_cover(int a, int b) {
  std::vector<int> best(static_cast<size_t>(b + 2), 1 << 20);
  best[a] = 0;
  for (int s = a; s <= b; ++s)
    for (int len = 1; s + len - 1 <= b; len *= 2)
      if ((s - 1) % len == 0) best[s + len] = std::min(best[s + len], best[s] + 1);
  return best[b + 1];
}

std::vector<double> random_vec(Rng& rng, int n) {
  std::vector<double> v(n);
  for (double& a : v) a = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("dyadic cover") {
  CHECK(dyadic_cover(1, 8, 8) == std::vector<DyadicInterval>{{1, 8}});
  CHECK(dyadic_cover(3, 7, 8) == std::vector<DyadicInterval>{{3, 4}, {5, 6}, {7, 7}});
  CHECK(dyadic_cover(5, 5, 8) == std::vector<DyadicInterval>{{5, 5}});
  CHECK_THROWS_AS(dyadic_cover(0, 3, 8), StructuralError);
  CHECK_THROWS_AS(dyadic_cover(4, 3, 8), StructuralError);
  CHECK_THROWS_AS(dyadic_cover(1, 9, 8), StructuralError);
  for (int k = 2; k <= 64; ++k)
    for (int a = 1; a <= k; ++a)
      for (int b = a; b <= k; ++b) {
        auto c = dyadic_cover(a, b, k);
        int at = a;
        for (auto I : c) {
          CHECK(is_dyadic(I));
          CHECK(I.a == at);
          at = I.b + 1;
        }
        CHECK(at == b + 1);
        CHECK(static_cast<int>(c.size()) == min_cover(a, b));
        CHECK(static_cast<int>(c.size()) <= 2 * clog2(k));
      }
}

TEST_CASE("estimate") {
  auto tree = binary_sampling_tree(40);
  oracle::Sequence seq(tree, 400, 3);
  Rng rng(1);
  seq.push(random_vec(rng, 40));
  seq.push(random_vec(rng, 40));
  LinfOptions o;
  o.k = 4;
  LinfState L(tree, seq.oracle(), seq.ys[0], o);
  CHECK(L.estimate(1, 1, tree.root) == 0.0);
  // additivity over siblings holds exactly for the sketch of a sum
  for (int v = 0; v < tree.size(); ++v) {
    if (tree.is_leaf(v)) continue;
    double sum = 0.0;
    for (int c : tree.nodes[v].children) sum += L.estimate(0, 1, c);
    const double e = L.estimate(0, 1, v);
    CHECK(std::fabs(sum - e) <= 0.5 * e);
  }
  // leaf estimates concentrate at r = 400
  int good = 0;
  for (int i = 0; i < 40; ++i) {
    const double d = seq.ys[1][i] - seq.ys[0][i];
    const double e = L.estimate(0, 1, tree.leaf_of[i]);
    good += std::fabs(e - d * d) <= 0.25 * d * d;
  }
  CHECK(good >= 36);
}

TEST_CASE("sample") {
  const int n = 16;
  auto tree = binary_sampling_tree(n);
  oracle::Sequence seq(tree, 32, 5);
  std::vector<double> y0(n, 1.0), y1 = y0, y2 = y0;
  y1[5] += 3.0;
  y2[0] += 3.0;
  y2[1] += 4.0;
  seq.push(y0);
  seq.push(y1);
  seq.push(y2);
  seq.push(y0);
  LinfOptions o;
  o.k = 8;
  LinfState L(tree, seq.oracle(), y0, o);
  for (int q = 0; q < 200; ++q) CHECK(L.sample(0, 1) == 5);
  CHECK(L.sample(0, 3) == -1);  // nothing to sample
  const int draws = 100000;
  int first = 0;
  const long tries0 = L.stats().tries;
  for (int q = 0; q < draws; ++q) {
    const int i = L.sample(0, 2);
    CHECK((i == 0 || i == 1));
    first += i == 0;
  }
  CHECK(std::fabs(first / static_cast<double>(draws) - 9.0 / 25.0) <= 0.03);
  const double mean_tries = static_cast<double>(L.stats().tries - tries0) / draws;
  MESSAGE("mean tries per sample " << mean_tries);
  CHECK(mean_tries <= 50.0);
}

TEST_CASE("sampler total variation") {
  const int n = 64;
  auto tree = binary_sampling_tree(n);
  for (int trial = 0; trial < 3; ++trial) {
    oracle::Sequence seq(tree, 64, 10 + trial);
    Rng rng(trial);
    auto y0 = random_vec(rng, n), y1 = random_vec(rng, n);
    seq.push(y0);
    seq.push(y1);
    LinfOptions o;
    o.k = 2;
    o.seed = 100 + trial;
    LinfState L(tree, seq.oracle(), y0, o);
    std::vector<double> p(n), f(n, 0.0);
    double tot = 0.0;
    for (int i = 0; i < n; ++i) tot += p[i] = (y1[i] - y0[i]) * (y1[i] - y0[i]);
    const int draws = 100000;
    for (int q = 0; q < draws; ++q) f[L.sample(0, 1)] += 1.0 / draws;
    double tv = 0.0;
    for (int i = 0; i < n; ++i) tv += 0.5 * std::fabs(f[i] - p[i] / tot);
    MESSAGE("TV " << tv);
    CHECK(tv <= 0.05);
  }
}

TEST_CASE("query on simple sequences") {
  const int n = 32, k = 16;
  auto tree = binary_sampling_tree(n);
  SUBCASE("constant sequence never corrects") {
    oracle::Sequence seq(tree, 32, 1);
    Rng rng(1);
    auto y = random_vec(rng, n);
    for (int l = 0; l <= k; ++l) seq.push(y);
    LinfOptions o;
    o.k = k;
    o.exhaustive_fallback = false;
    LinfState L(tree, seq.oracle(), y, o);
    for (int l = 1; l <= k; ++l) {
      CHECK(L.query() == y);
      CHECK(L.last_changed().empty());
    }
    CHECK_THROWS_AS(L.query(), SolverError);
  }
  SUBCASE("dyadic bookkeeping") {
    oracle::Sequence seq(tree, 32, 1);
    for (int l = 0; l <= k; ++l) seq.push(std::vector<double>(n, 0.0));
    LinfOptions o;
    o.k = k;
    LinfState L(tree, seq.oracle(), seq.ys[0], o);
    for (int l = 1; l <= k; ++l) {
      L.query();
      std::vector<DyadicInterval> want;
      for (int j = 0; (1 << j) <= l; ++j)
        if (l % (1 << j) == 0) want.push_back({l - (1 << j) + 1, l});
      CHECK(L.last_windows() == want);
    }
  }
  SUBCASE("small drift is never corrected") {
    const double eps = 0.1;
    oracle::Sequence seq(tree, 32, 2);
    Rng rng(2);
    std::vector<double> y = random_vec(rng, n);
    seq.push(y);
    // every coordinate moves by at most eps / (2 log k) in total
    const double step = eps / (2.0 * clog2(k)) / k;
    for (int l = 1; l <= k; ++l) {
      for (double& a : y) a += step * (rng.uniform() < 0.5 ? -1 : 1);
      seq.push(y);
    }
    LinfOptions o;
    o.k = k;
    o.eps_apx = eps;
    o.zeta = step * std::sqrt(static_cast<double>(n));
    o.exhaustive_fallback = false;
    LinfState L(tree, seq.oracle(), seq.ys[0], o);
    for (int l = 1; l <= k; ++l) {
      L.query();
      CHECK(L.last_changed().empty());
      CHECK(L.z() == seq.ys[0]);
    }
  }
}

TEST_CASE("a single jump is corrected") {
  const int n = 64, k = 16, runs = 200;
  const double eps = 0.01, delta = 0.05;
  auto tree = binary_sampling_tree(n);
  int caught = 0;
  for (int run = 0; run < runs; ++run) {
    oracle::Sequence seq(tree, 48, 1000 + run);
    Rng rng(run);
    std::vector<double> y = random_vec(rng, n);
    const int coord = rng.below(n);
    for (int l = 0; l <= k; ++l) {
      if (l == 5) y[coord] += 10 * eps;
      seq.push(y);
    }
    LinfOptions o;
    o.k = k;
    o.eps_apx = eps;
    o.delta_apx = delta;
    o.zeta = 10 * eps;
    o.exhaustive_fallback = false;
    o.max_samples = 64;
    o.seed = run;
    LinfState L(tree, seq.oracle(), seq.ys[0], o);
    bool ok = false;
    for (int l = 1; l <= 6; ++l) {
      L.query();
      if (l >= 5 && std::fabs(L.z()[coord] - y[coord]) <= eps) ok = true;
    }
    caught += ok;
  }
  CHECK(caught >= (1.0 - delta) * runs);
}

TEST_CASE("exhaustive fallback is exact") {
  const int n = 24, k = 8;
  auto tree = binary_sampling_tree(n);
  oracle::Sequence seq(tree, 16, 3);
  Rng rng(4);
  std::vector<double> y = random_vec(rng, n);
  seq.push(y);
  for (int l = 1; l <= k; ++l) {
    for (double& a : y) a += 0.3 * rng.normal();
    seq.push(y);
  }
  LinfOptions o;
  o.k = k;
  o.eps_apx = 0.05;
  o.zeta = 2.0;
  LinfState L(tree, seq.oracle(), seq.ys[0], o);
  for (int l = 1; l <= k; ++l) {
    L.query();
    for (int i = 0; i < n; ++i) CHECK(std::fabs(L.z()[i] - seq.ys[l][i]) <= o.eps_apx);
  }
  CHECK(L.stats().exhaustive == k);
  CHECK(L.stats().type1 == 0);
}

TEST_CASE("end to end guarantee on synthetic drift") {
  const int runs = 40;
  int ok = 0;
  twlp::LinfStats st;
  long samples = 0;
  for (int run = 0; run < runs; ++run) {
    ok += oracle::linf_run(run, 64, 16, 0.25, 0.5, 0.05, 2000, 8, &st);
    samples += st.samples;
  }
  MESSAGE("runs ok " << ok << "/" << runs << ", samples per run " << samples / runs);
  CHECK(ok >= 0.95 * runs);
}
