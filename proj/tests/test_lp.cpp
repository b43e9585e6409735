#include <sstream>

#include "doctest.h"
#include "twlp/corpus.hpp"
#include "twlp/errors.hpp"
#include "twlp/lp.hpp"

using namespace twlp;

namespace {

const char* kToy = R"(# toy
dims 1 2
obj -1 0
bounds 0 0 1
bounds 1 0 1
row 0: 0 1 1 1
rhs 1
)";

std::string error_of(const std::string& text) {
  try {
    parse_lp(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal problem") {
  LpProblem P = parse_lp(kToy);
  CHECK(P.d == 1);
  CHECK(P.n == 2);
  REQUIRE(P.entries.size() == 2);
  CHECK(P.entries[0].row == 0);
  CHECK(P.entries[0].col == 0);
  CHECK(P.entries[0].val == 1.0);
  CHECK(P.entries[1].col == 1);
  CHECK(P.c == std::vector<double>{-1, 0});
  CHECK(P.b == std::vector<double>{1});
  CHECK(P.upper == std::vector<double>{1, 1});
  CHECK(!P.radius);
  // spacing around ':' is free
  CHECK(parse_lp("dims 1 1\nobj 1\nbounds 0 0 1\nrow 0 : 0 2\nrhs 1\n").entries[0].val == 2.0);
}

TEST_CASE("write then parse is the identity") {
  for (InstanceKind k : {InstanceKind::PathFlow, InstanceKind::GridFlow, InstanceKind::RandomTw}) {
    LpProblem P = generate_instance(k, 7, 3).lp;
    P.radius = 0.125;
    P.block_sizes.assign(static_cast<size_t>(P.n), 1);
    const LpProblem Q = parse_lp(write_lp(P));
    CHECK(Q.d == P.d);
    CHECK(Q.n == P.n);
    CHECK(Q.c == P.c);
    CHECK(Q.b == P.b);
    CHECK(Q.lower == P.lower);
    CHECK(Q.upper == P.upper);
    CHECK(Q.block_sizes == P.block_sizes);
    CHECK(Q.radius == P.radius);
    CHECK(Q.matrix().to_triplets().size() == P.matrix().to_triplets().size());
    CHECK(write_lp(Q) == write_lp(P));
  }
}

TEST_CASE("diagnostics carry line and column") {
  CHECK(error_of("dims 1 2\nobj 0 0\nbounds 0 2 1\n").rfind("3:", 0) == 0);
  CHECK(error_of("dims 1 2\nobj 0 0\nbounds 0 2 1\n").find("not below") != std::string::npos);
  CHECK(error_of("obj 1\n").rfind("1:", 0) == 0);
  CHECK(error_of("dims 1 1\nobj 1x\n").rfind("2:", 0) == 0);
  CHECK(error_of("dims 1 1\nobj 1\nbounds 0 0 1\nrow 0: 5 1\nrhs 1\n").find("column index") != std::string::npos);
  CHECK(error_of("dims 1 1\nobj 1\nbounds 0 0 1\nrow 0 0 1\nrhs 1\n").find("':'") != std::string::npos);
  CHECK(error_of("dims 1 2\nobj 1 1\nbounds 0 0 1\nrhs 1\n").find("no bounds") != std::string::npos);
  CHECK(error_of("dims 1 1\nobj inf\n").find("finite") != std::string::npos);
  CHECK(error_of("dims 1 1\nobj 1\nbounds 0 0 1\nfoo\n") != "");
  CHECK_THROWS_AS(read_lp_file("/nonexistent/x.lp"), InputError);
}

TEST_CASE("generated instances") {
  SUBCASE("path of 4 buses") {
    Instance I = generate_instance(InstanceKind::PathFlow, 4, 1);
    CHECK(I.lp.d == 4);
    CHECK(I.lp.n == 7);
    CHECK(I.td.width() == 1);
    CHECK_NOTHROW(validate_td(dual_graph(I.lp.matrix()), I.td));
  }
  SUBCASE("3 x 3 grid") {
    Instance I = generate_instance(InstanceKind::GridFlow, 3, 1);
    CHECK(I.lp.d == 9);
    CHECK(I.td.width() == 3);
    CHECK_NOTHROW(validate_td(dual_graph(I.lp.matrix()), I.td));
  }
  SUBCASE("random partial k-trees") {
    for (int k = 1; k <= 10; ++k) {
      Instance I = generate_instance(InstanceKind::RandomTw, 30, k, k);
      CHECK(I.td.width() <= k);
      CHECK_NOTHROW(validate_td(dual_graph(I.lp.matrix()), I.td));
    }
  }
  SUBCASE("interior point is feasible") {
    for (InstanceKind k : {InstanceKind::PathFlow, InstanceKind::GridFlow, InstanceKind::RandomTw}) {
      Instance I = generate_instance(k, 9, 5);
      std::vector<double> ax = I.lp.matrix().multiply(I.interior);
      for (int i = 0; i < I.lp.d; ++i) CHECK(ax[i] == doctest::Approx(I.lp.b[i]).epsilon(1e-12));
      for (int j = 0; j < I.lp.n; ++j) {
        CHECK(I.interior[j] > I.lp.lower[j]);
        CHECK(I.interior[j] < I.lp.upper[j]);
      }
    }
  }
  SUBCASE("a fixed seed gives the same bytes") {
    for (InstanceKind k : {InstanceKind::PathFlow, InstanceKind::GridFlow, InstanceKind::RandomTw}) {
      const Instance a = generate_instance(k, 12, 9), b = generate_instance(k, 12, 9);
      CHECK(write_lp(a.lp) == write_lp(b.lp));
      std::ostringstream ta, tb;
      write_pace_td(ta, a.td);
      write_pace_td(tb, b.td);
      CHECK(ta.str() == tb.str());
    }
  }
  CHECK_THROWS_AS(generate_instance(InstanceKind::PathFlow, 1, 1), InputError);
}

TEST_CASE("built-in corpus") {
  const auto corpus = builtin_corpus();
  CHECK(corpus.size() >= 30);
  for (const auto& e : corpus) {
    Instance I = e.generate();
    CHECK(I.lp.n <= 512);
    CHECK(I.td.width() <= 10);
    CHECK_NOTHROW(validate_td(dual_graph(I.lp.matrix()), I.td));
  }
}
