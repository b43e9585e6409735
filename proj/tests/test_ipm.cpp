#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "twlp/errors.hpp"
#include "twlp/ipm.hpp"
#include "twlp/reference.hpp"

using namespace twlp;

namespace {

TreeDecomposition single_bag(int d) {
  TreeDecomposition td;
  td.num_vertices = d;
  td.bags.push_back({});
  for (int i = 0; i < d; ++i) td.bags[0].push_back(i);
  return td;
}

SparseMatrix row_of_ones(int n) {
  std::vector<Triplet> t;
  for (int j = 0; j < n; ++j) t.push_back({0, j, 1.0});
  return build_csc(t, 1, n);
}

// box barrier written out by hand
double box_grad(double l, double u, double x) { return 1.0 / (u - x) - 1.0 / (x - l); }
double box_hess(double l, double u, double x) { return 1.0 / ((u - x) * (u - x)) + 1.0 / ((x - l) * (x - l)); }

}  // namespace

TEST_CASE("gamma_mu") {
  LogBarrier phi({0.0}, {1.0});
  SUBCASE("box midpoint with zero slack") {
    GammaMu g = gamma_mu({0.5}, {0.0}, 1.0, phi);
    CHECK(std::fabs(g.mu[0]) <= 1e-15);
    CHECK(std::fabs(g.gamma[0]) <= 1e-15);
  }
  SUBCASE("the central point has gamma 0") {
    const double t = 3.0, x = 0.2;
    GammaMu g = gamma_mu({x}, {-t * box_grad(0, 1, x)}, t, phi);
    CHECK(std::fabs(g.gamma[0]) <= 1e-12);
  }
  SUBCASE("matches a hand evaluation") {
    Rng rng(4);
    std::vector<double> lo, hi, x, s;
    for (int i = 0; i < 50; ++i) {
      lo.push_back(rng.uniform(-3, 0));
      hi.push_back(lo.back() + rng.uniform(0.1, 4));
      x.push_back(rng.uniform(lo.back(), hi.back()));
      s.push_back(rng.normal());
    }
    std::vector<double> w(50);
    for (double& v : w) v = rng.uniform(1, 3);
    LogBarrier ph(lo, hi, w);
    const double t = 0.7;
    GammaMu g = gamma_mu(x, s, t, ph);
    for (int i = 0; i < 50; ++i) {
      const double mu = s[i] / t + w[i] * box_grad(lo[i], hi[i], x[i]);
      CHECK(g.mu[i] == doctest::Approx(mu).epsilon(1e-12));
      CHECK(g.gamma[i] == doctest::Approx(std::fabs(mu) / std::sqrt(box_hess(lo[i], hi[i], x[i]))).epsilon(1e-12));
    }
  }
  SUBCASE("boundary points are rejected") {
    CHECK_THROWS_AS(gamma_mu({1.0}, {0.0}, 1.0, phi), DomainError);
    CHECK_THROWS_AS(gamma_mu({-0.5}, {0.0}, 1.0, phi), DomainError);
  }
}

TEST_CASE("potential") {
  LogBarrier phi(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0));
  const double lam = 10.0;
  CHECK(potential(std::vector<double>(5, 0.0), lam, phi) == doctest::Approx(5.0));
  CHECK(potential(std::vector<double>(5, 1.0 / lam), lam, phi) == doctest::Approx(5.0 * std::cosh(1.0)));
  // monotone in each gamma
  Rng rng(2);
  for (int q = 0; q < 200; ++q) {
    std::vector<double> g(5);
    for (double& v : g) v = rng.uniform(0, 0.5);
    const double p0 = potential(g, lam, phi);
    g[rng.below(5)] += rng.uniform(1e-6, 0.1);
    CHECK(potential(g, lam, phi) > p0);
  }
}

TEST_CASE("step coefficients") {
  LogBarrier phi(std::vector<double>(4, 0.0), std::vector<double>(4, 1.0));
  const double lam = 12.0, alpha = 0.01;
  StepCoefficients sc = step_coefficients(std::vector<double>(4, 0.0), lam, phi, alpha);
  for (double c : sc.c) CHECK(c == doctest::Approx(lam / 2.0));
  CHECK(sc.alpha_bar == doctest::Approx(4.0 * alpha * alpha));

  SUBCASE("single block") {
    LogBarrier one({0.0}, {1.0}, {2.0});
    const double g = 0.05;
    StepCoefficients s1 = step_coefficients({g}, lam, one, alpha);
    const double a = lam * g / 2.0;
    CHECK(s1.c[0] == doctest::Approx(std::sinh(a) / g / std::sqrt(std::cosh(a) * std::cosh(a) / 2.0)));
  }
  SUBCASE("range") {
    Rng rng(6);
    for (int q = 0; q < 100; ++q) {
      std::vector<double> g(4);
      for (double& v : g) v = rng.uniform(0, 1.0);
      StepCoefficients r = step_coefficients(g, lam, phi, alpha);
      for (double c : r.c) {
        CHECK(c >= 0.0);
        CHECK(c <= lam * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("parameters from the barrier") {
  LogBarrier phi(std::vector<double>(10, 0.0), std::vector<double>(10, 1.0));
  IpmParams p = IpmParams::for_barrier(phi);
  CHECK(p.m == 10);
  CHECK(p.kappa == doctest::Approx(10.0));
  CHECK(p.lambda == doctest::Approx(64.0 * std::log(25600.0)));
  CHECK(p.eps_bar == doctest::Approx(1.0 / (1440.0 * p.lambda)));
  CHECK(p.alpha == doctest::Approx(p.eps_bar / 2));
  CHECK(p.eps_t == doctest::Approx(p.eps_bar / 8));
  CHECK(p.step_shrink == doctest::Approx(p.alpha / (64.0 * std::sqrt(10.0))));
  CHECK(initial_path_parameter(2, 3.0, 1.0, 2.0, 0.5, 1.0) == doctest::Approx(65536.0 * 3125.0 * 2.0 * 4.0));
}

TEST_CASE("shrink search") {
  auto pot = [](double h) { return 1.0 + h * h; };
  const double h = shrink_search(pot, 1.0, 5.0, 10.0);
  CHECK(pot(h) <= 5.0);
  CHECK(h == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(shrink_search(pot, 1.0, 500.0, 10.0) == 10.0);
}

TEST_CASE("centering") {
  oracle::Setup S(InstanceKind::PathFlow, 10, 5);
  const double t = 2.0;
  // c making (x, y) exactly central at t
  const auto s = S.centered_s(t);
  const auto aty = S.sys.A.multiply_transpose(S.y);
  for (size_t i = 0; i < s.size(); ++i) S.P.c[i] = s[i] + aty[i];
  const IpmParams prm = IpmParams::for_barrier(S.phi);

  SUBCASE("t_start = t_end returns the input") {
    ExactEngine E;
    CenteringStats st;
    PathPoint p = centering(S.P, prm, {S.x, S.y, t}, t, E, CenteringOptions{}, st);
    CHECK(st.iterations == 0);
    CHECK(p.x == S.x);
    CHECK(p.y == S.y);
  }
  SUBCASE("halving t keeps the potential below cosh(lambda/64)") {
    for (StepRule rule : {StepRule::Practical, StepRule::Theory}) {
      ExactEngine E;
      CenteringStats st;
      st.record_trace = true;
      CenteringOptions o;
      o.rule = rule;
      // the theory rule moves t by a factor 1 - step_shrink per step
      const double t1 = rule == StepRule::Theory ? t * std::pow(1 - prm.step_shrink, 20) : t / 2;
      PathPoint p = centering(S.P, prm, {S.x, S.y, t}, t1, E, o, st);
      CHECK(p.t == doctest::Approx(t1));
      CHECK(st.potential_violations == 0);
      CHECK(st.max_phi <= prm.cosh_hi());
      for (const auto& r : st.trace) CHECK(r.phi_after <= prm.cosh_hi());
      const GammaMu g = gamma_mu(p.x, dual_slack(S.P, p.y), p.t, S.phi);
      CHECK(potential(g.gamma, prm.lambda, S.phi) <= prm.cosh_hi());
    }
  }
  SUBCASE("a single step against the dense simulator") {
    ExactEngine E;
    CenteringOptions o;
    o.rule = StepRule::Theory;
    E.start(S.P, prm, o, {S.x, S.y, t});
    // perturb the start so the step is non-trivial
    Rng rng(8);
    std::vector<double> x = S.x;
    for (size_t i = 0; i < x.size(); ++i) {
      const double width = S.phi.hi(static_cast<int>(i)) - S.phi.lo(static_cast<int>(i));
      x[i] += 1e-4 * width * rng.uniform(-1, 1);
    }
    // not on the affine space, but the step itself only needs A dx = 0
    E.start(S.P, prm, o, {x, S.y, t});
    CenteringStats st;
    E.advance(t, t, st);
    const PathPoint q = E.point();
    oracle::NaiveStep N{oracle::dense(S.sys.A), &S.phi, prm.lambda, prm.alpha};
    const auto [dx, ds] = N.step(x, dual_slack(S.P, S.y), t);
    for (size_t i = 0; i < x.size(); ++i) CHECK(q.x[i] - x[i] == doctest::Approx(dx(i)).epsilon(1e-6).scale(1e-12));
    const auto s1 = dual_slack(S.P, q.y), s0 = dual_slack(S.P, S.y);
    for (size_t i = 0; i < x.size(); ++i) CHECK(s1[i] - s0[i] == doctest::Approx(ds(i)).epsilon(1e-6).scale(1e-12));
  }
}

TEST_CASE("initial modified program") {
  const SparseMatrix A = row_of_ones(2);
  const TreeDecomposition td = single_bag(1);
  OrderedSystem sys = order_system(A, td);
  LogBarrier phi({0.0, 0.0}, {1.0, 1.0});
  IpmParams prm = IpmParams::for_barrier(phi);
  prm.outer_radius = std::sqrt(2.0);
  prm.t_start = 1e6;
  ModifiedProgram M = build_initial_modified_program(sys.A, sys.T, {1.0}, {0.0, 0.0}, phi, prm);
  CHECK(M.x_c[0] == doctest::Approx(0.5));
  CHECK(M.x_c[1] == doctest::Approx(0.5));
  CHECK(M.x_o[0] == doctest::Approx(0.5));
  CHECK(M.x_o[1] == doctest::Approx(0.5));
  // feasible for the tripled system
  std::vector<double> ax = M.A.multiply(M.start.x);
  CHECK(ax[0] == doctest::Approx(1.0));
  // exactly central at t_start
  CenteringProblem P;
  P.A = &M.A;
  P.T = &sys.T;
  P.c = M.c;
  P.phi = &M.phi;
  GammaMu g = gamma_mu(M.start.x, dual_slack(P, M.start.y), M.t_start, M.phi);
  for (double v : g.gamma) CHECK(v <= 1e-9);
  // [A, A, -A] has the same dual graph
  const Graph G0 = dual_graph(sys.A), G1 = dual_graph(M.A);
  CHECK(G0.adj == G1.adj);

  SUBCASE("a wider row") {
    oracle::Setup S(InstanceKind::GridFlow, 3, 2);
    IpmParams q = IpmParams::for_barrier(S.phi);
    double R = 0.0;
    for (int i = 0; i < S.phi.size(); ++i) R += std::pow(S.phi.hi(i) - S.phi.lo(i), 2);
    q.outer_radius = std::sqrt(R);
    q.t_start = 1e8;
    ModifiedProgram M2 = build_initial_modified_program(S.sys.A, S.sys.T, [&] {
      std::vector<double> b(S.sys.A.rows());
      for (int i = 0; i < S.sys.A.rows(); ++i) b[S.sys.perm[i]] = S.inst.lp.b[i];
      return b;
    }(), S.inst.lp.c, S.phi, q);
    CHECK(dual_graph(M2.A).adj == dual_graph(S.sys.A).adj);
    // x_o solves A x = b
    std::vector<double> r = S.sys.A.multiply(M2.x_o);
    for (int i = 0; i < S.sys.A.rows(); ++i) CHECK(r[S.sys.perm[i]] == doctest::Approx(S.inst.lp.b[i]).epsilon(1e-9));
  }
}

TEST_CASE("extract original point") {
  LogBarrier phi({0.0, 0.0}, {1.0, 1.0});
  PathPoint p;
  p.x = {0.3, 0.6, 2.0, 1.5, 2.0, 1.5};
  p.y = {0.25};
  p.t = 0.1;
  PathPoint q = extract_original_point(p, 2, phi);
  CHECK(q.x[0] == doctest::Approx(0.3));
  CHECK(q.x[1] == doctest::Approx(0.6));
  CHECK(q.y == p.y);
  CHECK(q.t == p.t);
  p.x[3] = 5.0;  // x_1 leaves [0, 1]
  CHECK_THROWS_AS(extract_original_point(p, 2, phi), SolverError);
  CHECK_THROWS_AS(extract_original_point(PathPoint{{1, 2}, {}, 1}, 2, phi), StructuralError);
}

TEST_CASE("toy solve") {
  const SparseMatrix A = row_of_ones(2);
  const TreeDecomposition td = single_bag(1);
  SolveOptions o;
  for (SolveMode mode : {SolveMode::Exact, SolveMode::Maintained}) {
    o.mode = mode;
    Solution s = solve(A, {1.0}, {-1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, td, o);
    const double tol = o.eps * s.lipschitz * s.outer_radius;
    CHECK(std::fabs(s.objective + 1.0) <= tol);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::fabs(s.x[1]) <= 1e-4);
    CHECK(s.interior);
    CHECK(s.residual <= 1e-9);
  }
  SUBCASE("zero objective") {
    o.mode = SolveMode::Exact;
    Solution s = solve(A, {1.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, td, o);
    CHECK(s.objective == 0.0);
    CHECK(s.x[0] + s.x[1] == doctest::Approx(1.0));
    CHECK(s.interior);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(solve(A, {1.0}, {0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, td, o), ValueError);
    o.eps = 0.0;
    CHECK_THROWS_AS(solve(A, {1.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, td, o), ValueError);
    o.eps = 1e-6;
    CHECK_THROWS_AS(solve(A, {1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, td, o), StructuralError);
  }
}

TEST_CASE("random instances against the reference solver") {
  for (int seed = 0; seed < 6; ++seed) {
    const InstanceKind kind = seed % 3 == 0 ? InstanceKind::PathFlow : seed % 3 == 1 ? InstanceKind::GridFlow
                                                                                     : InstanceKind::RandomTw;
    Instance I = generate_instance(kind, seed % 3 == 1 ? 3 : 10, seed);
    SolveOptions o;
    Solution s = solve(I.lp.matrix(), I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
    const double ref = reference_solve(I.lp).objective;
    CHECK(std::fabs(s.objective - ref) <= o.eps * s.lipschitz * s.outer_radius);
    CHECK(s.phase1.potential_violations == 0);
    CHECK(s.phase2.potential_violations == 0);
  }
}
