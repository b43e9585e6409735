#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "twlp/cpm.hpp"
#include "twlp/reference.hpp"

using namespace twlp;

namespace {

// c chosen so that (x, s = c - A^T y) sits near the central point at t with
// centrality error gamma_i = noise |xi_i|
void near_center(oracle::Setup& S, double t, double noise, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> s = S.centered_s(t);
  for (size_t i = 0; i < s.size(); ++i)
    s[i] += noise * t * std::sqrt(S.phi.hessian(static_cast<int>(i), S.x[i])) * rng.normal();
  const std::vector<double> aty = S.sys.A.multiply_transpose(S.y);
  for (size_t i = 0; i < s.size(); ++i) S.P.c[i] = s[i] + aty[i];
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
  return e;
}

double max_abs(const std::vector<double>& a) {
  double e = 0.0;
  for (double v : a) e = std::max(e, std::fabs(v));
  return e;
}

std::vector<double> node_sketch(const SketchMatrix& Phi, const SamplingTree& T, int v, const std::vector<double>& y) {
  std::vector<double> out(static_cast<size_t>(Phi.rows()), 0.0);
  for (int j : T.nodes[v].chi) Phi.add_column(j, y[j], out);
  return out;
}

CpmOptions sampling_options(int window) {
  CpmOptions o;
  o.window = window;
  o.exhaustive_fallback = false;
  o.max_samples = 5;
  o.sketch_dim = 24;
  return o;
}

}  // namespace

TEST_CASE("initialize: output is the input point") {
  oracle::Setup S(InstanceKind::PathFlow, 16, 1);
  const double t = 2.0;
  near_center(S, t, 1e-3, 1);
  const IpmParams prm = IpmParams::for_barrier(S.phi);
  MaintainedEngine E(CpmOptions{});
  E.start(S.P, prm, CenteringOptions{}, {S.x, S.y, t});
  PathPoint p = E.point();
  CHECK(max_abs_diff(p.x, S.x) <= 1e-12 * (1 + max_abs(S.x)));
  CHECK(max_abs_diff(dual_slack(S.P, p.y), S.s()) <= 1e-10 * (1 + max_abs(S.s())));
  CHECK(E.t_bar() == t);
  CHECK(E.window() == 6);  // ceil(sqrt(31))
}

TEST_CASE("oracles against the dense targets") {
  oracle::Setup S(InstanceKind::RandomTw, 24, 3);
  const double t = 1.0;
  near_center(S, t, 1e-3, 3);
  const IpmParams prm = IpmParams::for_barrier(S.phi);
  MaintainedEngine E(sampling_options(8));
  CenteringStats st;
  E.start(S.P, prm, CenteringOptions{}, {S.x, S.y, t});
  REQUIRE(E.sampling());
  auto Ox = E.oracle_x(), Os = E.oracle_s();
  std::vector<std::vector<double>> hx{E.target_x()}, hs{E.target_s()};
  for (int step = 0; step < 6; ++step) {
    // t_end = t keeps the window open, so the sketches see sparse updates
    E.advance(t, t, st);
    hx.push_back(E.target_x());
    hs.push_back(E.target_s());
    const int l = E.window_step();
    CHECK(l == step + 1);
    const auto& T = E.sampling_tree();
    for (int v = 0; v < T.size(); ++v) {
      const auto a = Ox.typeI(l, v), b = node_sketch(E.sketch(), T, v, hx.back());
      CHECK(max_abs_diff(a, b) <= 1e-8 * (1 + max_abs(b)));
      const auto c = Os.typeI(l, v), d = node_sketch(E.sketch(), T, v, hs.back());
      CHECK(max_abs_diff(c, d) <= 1e-8 * (1 + max_abs(d)));
    }
    for (int i = 0; i < S.sys.A.cols(); ++i) {
      CHECK(Ox.typeII(l, i) == doctest::Approx(hx.back()[i]).epsilon(1e-10));
      CHECK(Os.typeII(l, i) == doctest::Approx(hs.back()[i]).epsilon(1e-10));
    }
  }
  CHECK(st.restarts == 0);
  // historical reads equal what a full recorder logged
  Rng rng(5);
  for (int probe = 0; probe < 500; ++probe) {
    const int l = rng.below(E.window_step() + 1), i = rng.below(S.sys.A.cols());
    CHECK(Ox.typeII(l, i) == doctest::Approx(hx[l][i]).epsilon(1e-10));
    CHECK(Os.typeII(l, i) == doctest::Approx(hs[l][i]).epsilon(1e-10));
  }
  CHECK_THROWS_AS(Ox.typeII(E.window_step() + 1, 0), SolverError);
}

TEST_CASE("at the exact centre nothing moves") {
  oracle::Setup S(InstanceKind::PathFlow, 20, 2);
  const double t = 3.0;
  near_center(S, t, 0.0, 2);
  const IpmParams prm = IpmParams::for_barrier(S.phi);
  for (bool sampled : {false, true}) {
    MaintainedEngine E(sampled ? sampling_options(8) : CpmOptions{});
    CenteringStats st;
    E.start(S.P, prm, CenteringOptions{}, {S.x, S.y, t});
    const auto xb = E.state().x_bar(), sb = E.state().s_bar();
    for (int q = 0; q < 3; ++q) CHECK(E.advance(t, t, st) == t);
    CHECK(E.state().x_bar() == xb);
    CHECK(E.state().s_bar() == sb);
    CHECK(max_abs_diff(E.point().x, S.x) <= 1e-12);
  }
}

TEST_CASE("approximation bounds against dense reconstruction") {
  int clean = 0;
  for (int run = 0; run < 50; ++run) {
    oracle::Setup S(InstanceKind::PathFlow, 16, 100 + run);  // 31 variables
    const double t = 1.0;
    near_center(S, t, 2e-3, run);
    const IpmParams prm = IpmParams::for_barrier(S.phi);
    CpmOptions o;
    o.debug = true;
    o.seed = run;
    MaintainedEngine E(o);
    CenteringStats st;
    E.start(S.P, prm, CenteringOptions{}, {S.x, S.y, t});
    double tt = t;
    for (int q = 0; q < 10; ++q) tt = E.advance(tt, 0.5 * t, st);
    clean += st.approx_violations == 0;
  }
  CHECK(clean == 50);
}

TEST_CASE("a restarted step equals the exact engine's step") {
  oracle::Setup S(InstanceKind::GridFlow, 4, 9);
  const double t = 1.0;
  near_center(S, t, 2e-3, 9);
  const IpmParams prm = IpmParams::for_barrier(S.phi);
  MaintainedEngine E(CpmOptions{});
  CenteringStats st, sx;
  E.start(S.P, prm, CenteringOptions{}, {S.x, S.y, t});
  double tt = t;
  for (int q = 0; q < 12; ++q) {
    PathPoint p = E.point();
    p.t = tt;
    ExactEngine X;
    X.start(S.P, prm, CenteringOptions{}, p);
    E.force_restart();
    const long before = st.restarts;
    E.advance(tt, tt, st);
    X.advance(tt, tt, sx);
    CHECK(st.restarts == before + 1);
    const PathPoint a = E.point(), b = X.point();
    CHECK(max_abs_diff(a.x, b.x) <= 1e-7 * (1 + max_abs(b.x)));
    const auto sa = dual_slack(S.P, a.y), sb = dual_slack(S.P, b.y);
    CHECK(max_abs_diff(sa, sb) <= 1e-7 * (1 + max_abs(sb)));
    // then move t on
    tt = E.advance(tt, 0.5 * tt, st);
  }
}

TEST_CASE("maintained and exact solves agree") {
  struct Case {
    InstanceKind kind;
    int size;
  };
  for (Case c : {Case{InstanceKind::PathFlow, 12}, Case{InstanceKind::GridFlow, 3}, Case{InstanceKind::RandomTw, 14}}) {
    Instance I = generate_instance(c.kind, c.size, 4);
    SolveOptions o;
    const Solution ex = solve(I.lp.matrix(), I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
    o.mode = SolveMode::Maintained;
    const Solution mt = solve(I.lp.matrix(), I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
    o.window = 3;
    const Solution w3 = solve(I.lp.matrix(), I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
    const double tol = o.eps * ex.lipschitz * ex.outer_radius;
    const double ref = reference_solve(I.lp).objective;
    CHECK(std::fabs(ex.objective - mt.objective) <= 2 * tol);
    CHECK(std::fabs(mt.objective - ref) <= tol);
    CHECK(std::fabs(w3.objective - ref) <= tol);
    CHECK(mt.interior);
    CHECK(mt.restarts > 0);
    const double scale = mt.outer_radius * I.lp.matrix().norm2_estimate() + std::sqrt(std::inner_product(
                                                                                  I.lp.b.begin(), I.lp.b.end(), I.lp.b.begin(), 0.0));
    CHECK(mt.residual <= 1e-8 * scale);
    // identical inputs and seed give identical output
    o.window = 0;
    const Solution again = solve(I.lp.matrix(), I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
    CHECK(again.x == mt.x);
  }
}
