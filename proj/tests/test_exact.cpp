#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "loopybp/exact.hpp"
#include "loopybp/schedulers.hpp"

using namespace loopybp;

TEST_CASE("single variable with an informative unary") {
  FactorGraph g({{0, 2}}, {{0, {0}, {1.0, std::exp(-1.0)}}});
  const double z = 1.0 + std::exp(-1.0);
  for (const ExactResult& res : {enumerate_marginals(g), eliminate_marginals(g)}) {
    CHECK(res.log_z == doctest::Approx(std::log(z)).epsilon(1e-12));
    CHECK(res.marginals[0][0] == doctest::Approx(1.0 / z).epsilon(1e-12));
    CHECK(res.marginals[0][1] == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-12));
  }
}

TEST_CASE("all-ones factors give uniform marginals and log_z = V log 2") {
  auto g = gen_potts_grid(3, 0.0, 2);
  const ExactResult res = enumerate_marginals(g);
  CHECK(res.log_z == doctest::Approx(9.0 * std::log(2.0)).epsilon(1e-10));
  for (const auto& m : res.marginals)
    for (double p : m) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("symmetric potts pair has uniform marginals") {
  const double off = std::exp(-1.0);
  FactorGraph g({{0, 2}, {1, 2}}, {{0, {0, 1}, {1.0, off, off, 1.0}}});
  const ExactResult res = enumerate_marginals(g);
  for (const auto& m : res.marginals)
    for (double p : m) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("enumeration agrees with the independent brute-force oracle") {
  testutil::Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    auto g = testutil::random_graph(rng, 3, 4, 3, 3);
    const auto got = enumerate_marginals(g);
    const auto want = testutil::brute_force_marginals(g);
    CHECK(got.log_z == doctest::Approx(want.log_z).epsilon(1e-10));
    for (std::int32_t i = 0; i < g.num_variables(); ++i)
      for (std::size_t x = 0; x < want.marginals[i].size(); ++x)
        CHECK(got.marginals[i][x] == doctest::Approx(want.marginals[i][x]).epsilon(1e-10));
  }
}

TEST_CASE("elimination agrees with enumeration on random graphs") {
  testutil::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = testutil::random_graph(rng, 4 + static_cast<std::int32_t>(rng() % 7), 10);
    const auto en = enumerate_marginals(g);
    const auto el = eliminate_marginals(g);
    CHECK(el.log_z == doctest::Approx(en.log_z).epsilon(1e-10));
    REQUIRE(el.marginals.size() == en.marginals.size());
    for (std::size_t i = 0; i < en.marginals.size(); ++i) {
      double sum = 0.0;
      for (std::size_t x = 0; x < en.marginals[i].size(); ++x) {
        CHECK(std::abs(el.marginals[i][x] - en.marginals[i][x]) < 1e-10);
        sum += el.marginals[i][x];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("log_z is invariant under the elimination order") {
  testutil::Rng rng(9);
  auto g = gen_potts_grid(4, 5.0, 17);
  const double reference = eliminate_marginals(g).log_z;
  std::vector<std::int32_t> order(g.num_variables());
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    const auto res = eliminate_marginals(g, order);
    CHECK(res.log_z == doctest::Approx(reference).epsilon(1e-9));
  }
}

TEST_CASE("disconnected graphs factorize over components") {
  testutil::Rng rng(15);
  // Two 3-variable chains with no shared variables, plus a free variable.
  std::vector<VariableSpec> vars(7);
  for (std::int32_t i = 0; i < 7; ++i) vars[i] = {i, 2};
  std::vector<Factor> factors = {
      {0, {0, 1}, testutil::random_table(rng, 4)},
      {1, {1, 2}, testutil::random_table(rng, 4)},
      {2, {3, 4}, testutil::random_table(rng, 4)},
      {3, {4, 5}, testutil::random_table(rng, 4)},
  };
  FactorGraph g(std::move(vars), std::move(factors));

  const auto whole = eliminate_marginals(g);
  CHECK(whole.log_z == doctest::Approx(enumerate_marginals(g).log_z).epsilon(1e-10));

  // Componentwise: variable 6 is free and contributes log 2.
  std::vector<VariableSpec> half_vars = {{0, 2}, {1, 2}, {2, 2}};
  std::vector<Factor> c1 = {{0, {0, 1}, g.factor(0).table}, {1, {1, 2}, g.factor(1).table}};
  std::vector<Factor> c2 = {{0, {0, 1}, g.factor(2).table}, {1, {1, 2}, g.factor(3).table}};
  const double z1 = eliminate_marginals(FactorGraph(half_vars, c1)).log_z;
  const double z2 = eliminate_marginals(FactorGraph(half_vars, c2)).log_z;
  CHECK(whole.log_z == doctest::Approx(z1 + z2 + std::log(2.0)).epsilon(1e-10));
  CHECK(whole.marginals[6][0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a 10x10 grid at C=5 is exactly solvable in under a second") {
  auto g = gen_potts_grid(10, 5.0, 0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = eliminate_marginals(g);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(elapsed < 1.0);
  REQUIRE(res.marginals.size() == 100);
  for (const auto& m : res.marginals) {
    CHECK(m[0] + m[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m[0] >= 0.0);
    CHECK(m[1] >= 0.0);
  }
  CHECK(std::isfinite(res.log_z));
}

TEST_CASE("size guards") {
  // 23 binary variables exceed the enumeration cap.
  std::vector<VariableSpec> vars(23);
  for (std::int32_t i = 0; i < 23; ++i) vars[i] = {i, 2};
  FactorGraph g(std::move(vars), {});
  CHECK_THROWS_AS(enumerate_marginals(g), TooLarge);

  // A factor over 13 variables of cardinality 4 exceeds the width cap.
  std::vector<VariableSpec> wide_vars(13);
  for (std::int32_t i = 0; i < 13; ++i) wide_vars[i] = {i, 4};
  std::vector<std::int32_t> scope(13);
  std::iota(scope.begin(), scope.end(), 0);
  const std::size_t entries = std::size_t{1} << 26;
  std::vector<Factor> wide = {{0, scope, std::vector<double>(entries, 1.0)}};
  FactorGraph gw(std::move(wide_vars), std::move(wide));
  CHECK_THROWS_AS(eliminate_marginals(gw), WidthTooLarge);
}

TEST_CASE("average per-variable KL") {
  testutil::Rng rng(25);
  auto g = testutil::random_tree(rng, 6);
  const auto exact = eliminate_marginals(g);

  SUBCASE("matching beliefs give zero") {
    std::vector<Belief> beliefs;
    for (std::int32_t i = 0; i < g.num_variables(); ++i)
      beliefs.push_back({NodeRef::var(i), exact.marginals[i]});
    CHECK(avg_variable_kl(exact, beliefs) == 0.0);
  }
  SUBCASE("converged tree beliefs are within 1e-8") {
    RunOptions opts;
    opts.schedule = Schedule::rbp0l;
    opts.tolerance = 1e-12;
    auto [msgs, st] = run_rbp0l(g, opts);
    REQUIRE(st.converged);
    std::vector<Belief> beliefs;
    for (std::int32_t i = 0; i < g.num_variables(); ++i)
      beliefs.push_back(variable_belief(g, msgs, i));
    CHECK(avg_variable_kl(exact, beliefs) < 1e-8);
  }
  SUBCASE("pinned value for a single uniform belief") {
    FactorGraph single({{0, 2}}, {{0, {0}, {9.0, 1.0}}});
    const auto ex = enumerate_marginals(single);
    REQUIRE(ex.marginals[0][0] == doctest::Approx(0.9).epsilon(1e-12));
    const std::vector<Belief> uniform = {{NodeRef::var(0), {0.5, 0.5}}};
    const double expected = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
    CHECK(avg_variable_kl(ex, uniform) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(avg_variable_kl(ex, uniform) == doctest::Approx(0.368064).epsilon(1e-6));
  }
  SUBCASE("mismatched belief sets are rejected") {
    std::vector<Belief> beliefs;
    CHECK_THROWS_AS(avg_variable_kl(exact, beliefs), MissingVariable);
    for (std::int32_t i = 0; i < g.num_variables(); ++i)
      beliefs.push_back({NodeRef::var(i), exact.marginals[i]});
    beliefs[2].target = NodeRef::var(3);
    CHECK_THROWS_AS(avg_variable_kl(exact, beliefs), MissingVariable);
  }
}
