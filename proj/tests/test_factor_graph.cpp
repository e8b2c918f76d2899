#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "loopybp/exact.hpp"
#include "loopybp/factor_graph.hpp"
#include "loopybp/model_io.hpp"

using namespace loopybp;

TEST_CASE("smallest valid graph has two directed edges") {
  FactorGraph g({{0, 2}}, {{0, {0}, {1.0, 1.0}}});
  CHECK(g.num_variables() == 1);
  CHECK(g.num_factors() == 1);
  CHECK(g.num_edges() == 2);
}

TEST_CASE("each adjacency yields two directions") {
  FactorGraph g({{0, 2}, {1, 2}}, {{0, {0, 1}, {1.0, 2.0, 3.0, 4.0}}});
  CHECK(g.num_edges() == 4);
  // Variable sources first, then factor sources.
  CHECK(g.edge(0).src == NodeRef::var(0));
  CHECK(g.edge(1).src == NodeRef::var(1));
  CHECK(g.edge(2).src == NodeRef::fac(0));
  CHECK(g.edge(2).dst == NodeRef::var(0));
  CHECK(g.edge(3).dst == NodeRef::var(1));
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    CHECK(g.edge(g.edge(e).reverse).reverse == e);
    CHECK(g.edge(e).src == g.edge(g.edge(e).reverse).dst);
  }
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(FactorGraph({{0, 2}}, {{0, {0}, {1.0, 0.0}}}), NonPositiveEntry);
  CHECK_THROWS_AS(FactorGraph({{0, 2}}, {{0, {0}, {1.0, -2.0}}}), NonPositiveEntry);
  CHECK_THROWS_AS(FactorGraph({{0, 2}}, {{0, {0}, {1.0, std::nan("")}}}), NonPositiveEntry);
  CHECK_THROWS_AS(FactorGraph({{0, 2}}, {{0, {0}, {1.0, 1.0, 1.0}}}), ScopeMismatch);
  CHECK_THROWS_AS(FactorGraph({{0, 2}}, {{0, {1}, {1.0, 1.0}}}), UnknownVariable);
  CHECK_THROWS_AS(FactorGraph({{0, 2}}, {{0, {0, 0}, {1.0, 1.0, 1.0, 1.0}}}), ScopeMismatch);
  CHECK_THROWS_AS(FactorGraph({{0, 0}}, {}), InvalidModel);
  CHECK_THROWS_AS(FactorGraph({{1, 2}}, {}), InvalidModel);
}

TEST_CASE("edge count equals twice the total scope size on random graphs") {
  testutil::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = testutil::random_graph(rng, 6, 8);
    std::int64_t total_scope = 0;
    for (std::int32_t a = 0; a < g.num_factors(); ++a)
      total_scope += static_cast<std::int64_t>(g.factor(a).scope.size());
    CHECK(g.num_edges() == 2 * total_scope);
    // Adjacency is consistent both ways.
    for (std::int32_t a = 0; a < g.num_factors(); ++a)
      for (std::int32_t i : g.factor(a).scope) {
        const auto facs = g.factors_of(i);
        CHECK(std::find(facs.begin(), facs.end(), a) != facs.end());
      }
  }
}

TEST_CASE("potts grid shape") {
  auto g = gen_potts_grid(10, 5.0, 0);
  CHECK(g.num_variables() == 100);
  CHECK(g.num_factors() == 100 + 180);
  CHECK(g.num_edges() == 2 * (100 + 2 * 180));
  for (std::int32_t i = 0; i < 100; ++i) CHECK(g.cardinality(i) == 2);
}

TEST_CASE("potts grid with c=0 is all ones") {
  auto g = gen_potts_grid(3, 0.0, 42);
  for (std::int32_t a = 0; a < g.num_factors(); ++a)
    for (double t : g.factor(a).table) CHECK(t == 1.0);
}

TEST_CASE("potts draws stay in range and tables have the pair shape") {
  auto g = gen_potts_grid(2, 5.0, 7);
  REQUIRE(g.num_factors() == 4 + 4);
  for (std::int32_t a = 0; a < 4; ++a) {
    const auto& t = g.factor(a).table;
    REQUIRE(t.size() == 2);
    CHECK(t[0] == 1.0);
    const double u = -std::log(t[1]);
    CHECK(u >= -5.0);
    CHECK(u <= 5.0);
  }
  for (std::int32_t a = 4; a < 8; ++a) {
    const auto& t = g.factor(a).table;
    REQUIRE(t.size() == 4);
    CHECK(t[0] == 1.0);
    CHECK(t[3] == 1.0);
    CHECK(t[1] == t[2]);
    const double alpha = -std::log(t[1]);
    CHECK(alpha >= -5.0);
    CHECK(alpha <= 5.0);
  }
  // Independent replay of the sampling scheme: one uniform draw per factor in
  // factor-id order.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coupling(-5.0, 5.0);
  for (std::int32_t a = 0; a < 8; ++a) {
    const double draw = coupling(rng);
    CHECK(g.factor(a).table[1] == doctest::Approx(std::exp(-draw)).epsilon(1e-15));
  }
}

TEST_CASE("generated tables respect the coupling floor") {
  const double c = 5.0;
  auto g = gen_potts_grid(4, c, 123);
  const double floor = std::exp(-c);
  for (std::int32_t a = 0; a < g.num_factors(); ++a)
    for (double t : g.factor(a).table) CHECK(t >= floor * (1.0 - 1e-12));
}

TEST_CASE("grid generation is a pure function of (n, c, seed)") {
  const auto a = save_model(gen_potts_grid(4, 3.0, 99));
  const auto b = save_model(gen_potts_grid(4, 3.0, 99));
  CHECK(a == b);
  const auto c = save_model(gen_potts_grid(4, 3.0, 100));
  CHECK(a != c);
}

TEST_CASE("save/load round trip is exact") {
  auto g = gen_potts_grid(2, 5.0, 7);
  const std::string text = save_model(g);
  const FactorGraph back = load_model(text);
  REQUIRE(back.num_variables() == g.num_variables());
  REQUIRE(back.num_factors() == g.num_factors());
  for (std::int32_t i = 0; i < g.num_variables(); ++i)
    CHECK(back.cardinality(i) == g.cardinality(i));
  for (std::int32_t a = 0; a < g.num_factors(); ++a) {
    CHECK(back.factor(a).scope == g.factor(a).scope);
    REQUIRE(back.factor(a).table.size() == g.factor(a).table.size());
    for (std::size_t k = 0; k < g.factor(a).table.size(); ++k)
      CHECK(back.factor(a).table[k] == g.factor(a).table[k]);  // bit exact
  }
  CHECK(save_model(back) == text);
}

TEST_CASE("round trip survives random graphs with comments") {
  testutil::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = testutil::random_graph(rng, 5, 6);
    const std::string text = "# generated for a test\n" + save_model(g) + "# trailing comment\n";
    const FactorGraph back = load_model(text);
    CHECK(save_model(back) == save_model(g));
  }
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(load_model(""), ParseError);
  CHECK_THROWS_AS(load_model("NOTAGRAPH 1\n1\n2\n0\n"), ParseError);

  SUBCASE("declared factor count larger than actual") {
    const std::string text = "FACTORGRAPH 1\n1\n2\n2\n1 0\n1 1\n";
    CHECK_THROWS_AS(load_model(text), ParseError);
    try {
      load_model(text);
    } catch (const ParseError& e) {
      CHECK(e.line_number == 6);
    }
  }
  SUBCASE("declared factor count smaller than actual") {
    CHECK_THROWS_AS(load_model("FACTORGRAPH 1\n1\n2\n0\n1 0\n1 1\n"), ParseError);
  }
  SUBCASE("wrong table length") {
    CHECK_THROWS_AS(load_model("FACTORGRAPH 1\n1\n2\n1\n1 0\n1 1 1\n"), ParseError);
  }
  SUBCASE("bad number") {
    CHECK_THROWS_AS(load_model("FACTORGRAPH 1\n1\n2\n1\n1 0\n1 zebra\n"), ParseError);
  }
  SUBCASE("variable id out of range") {
    CHECK_THROWS_AS(load_model("FACTORGRAPH 1\n1\n2\n1\n1 3\n1 1\n"), ParseError);
  }
}

TEST_CASE("load rejects non-positive tables") {
  CHECK_THROWS_AS(load_model("FACTORGRAPH 1\n1\n2\n1\n1 0\n1 0\n"), NonPositiveEntry);
  CHECK_THROWS_AS(load_model("FACTORGRAPH 1\n1\n2\n1\n1 0\n1 -0.5\n"), NonPositiveEntry);
}

TEST_CASE("hand-written chain file matches hand-computed marginals") {
  // Two binary variables: unary [2, 1] on x0 and a chain factor preferring
  // agreement. p(x0, x1) ~ t0(x0) * t01(x0, x1) with t01 = [[3, 1], [1, 3]].
  const std::string text =
      "# two-variable chain\n"
      "FACTORGRAPH 1\n"
      "2\n"
      "2 2\n"
      "2\n"
      "1 0\n"
      "2 1\n"
      "2 0 1\n"
      "3 1 1 3\n";
  const FactorGraph g = load_model(text);
  const ExactResult res = enumerate_marginals(g);
  // Z = 2*3 + 2*1 + 1*1 + 1*3 = 12; p(x0=0) = 8/12, p(x1=0) = 7/12.
  CHECK(res.log_z == doctest::Approx(std::log(12.0)).epsilon(1e-12));
  CHECK(res.marginals[0][0] == doctest::Approx(8.0 / 12.0).epsilon(1e-12));
  CHECK(res.marginals[1][0] == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
}
