// Shared test utilities: generators for random graphs, trees and messages,
// plus a brute-force marginal oracle kept independent of the library's exact
// module (linear domain, long double, no shared code).
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "loopybp/factor_graph.hpp"

namespace testutil {

using loopybp::Factor;
using loopybp::FactorGraph;
using loopybp::VariableSpec;

using Rng = std::mt19937_64;

inline std::vector<double> random_table(Rng& rng, std::size_t size, double log_scale = 5.0) {
  std::uniform_real_distribution<double> u(-log_scale, log_scale);
  std::vector<double> t(size);
  for (auto& x : t) x = std::exp(u(rng));
  return t;
}

/// Normalized log-domain message over `card` states.
inline std::vector<double> random_log_message(Rng& rng, std::int32_t card,
                                              double log_scale = 3.0) {
  std::uniform_real_distribution<double> u(-log_scale, log_scale);
  std::vector<double> m(card);
  for (auto& x : m) x = u(rng);
  double hi = m[0];
  for (double x : m) hi = std::max(hi, x);
  double s = 0.0;
  for (double x : m) s += std::exp(x - hi);
  const double lse = hi + std::log(s);
  for (auto& x : m) x -= lse;
  return m;
}

/// Random tree of binary variables: pairwise factor per edge (v attaches to a
/// uniform earlier variable), optional unaries, entries exp(U[-scale, scale]).
inline FactorGraph random_tree(Rng& rng, std::int32_t num_vars, bool with_unaries = true,
                               double log_scale = 5.0) {
  std::vector<VariableSpec> vars(num_vars);
  for (std::int32_t i = 0; i < num_vars; ++i) vars[i] = {i, 2};
  std::vector<Factor> factors;
  if (with_unaries) {
    for (std::int32_t i = 0; i < num_vars; ++i) {
      Factor f;
      f.id = static_cast<std::int32_t>(factors.size());
      f.scope = {i};
      f.table = random_table(rng, 2, log_scale);
      factors.push_back(std::move(f));
    }
  }
  for (std::int32_t v = 1; v < num_vars; ++v) {
    std::uniform_int_distribution<std::int32_t> pick(0, v - 1);
    Factor f;
    f.id = static_cast<std::int32_t>(factors.size());
    f.scope = {pick(rng), v};
    f.table = random_table(rng, 4, log_scale);
    factors.push_back(std::move(f));
  }
  return FactorGraph(std::move(vars), std::move(factors));
}

/// Random small graph: cardinalities in [2, max_card], factor arities in
/// [1, max_arity] over distinct random variables.
inline FactorGraph random_graph(Rng& rng, std::int32_t num_vars, std::int32_t num_factors,
                                std::int32_t max_arity = 3, std::int32_t max_card = 4,
                                double log_scale = 2.0) {
  std::uniform_int_distribution<std::int32_t> card(2, max_card);
  std::vector<VariableSpec> vars(num_vars);
  for (std::int32_t i = 0; i < num_vars; ++i) vars[i] = {i, card(rng)};
  std::vector<Factor> factors;
  std::uniform_int_distribution<std::int32_t> arity_pick(1, std::min(max_arity, num_vars));
  std::uniform_int_distribution<std::int32_t> var_pick(0, num_vars - 1);
  for (std::int32_t a = 0; a < num_factors; ++a) {
    const std::int32_t arity = arity_pick(rng);
    std::vector<std::int32_t> scope;
    while (static_cast<std::int32_t>(scope.size()) < arity) {
      const std::int32_t v = var_pick(rng);
      if (std::find(scope.begin(), scope.end(), v) == scope.end()) scope.push_back(v);
    }
    std::size_t size = 1;
    for (std::int32_t v : scope) size *= vars[v].cardinality;
    factors.push_back({a, std::move(scope), random_table(rng, size, log_scale)});
  }
  return FactorGraph(std::move(vars), std::move(factors));
}

struct BruteForceResult {
  double log_z;
  std::vector<std::vector<double>> marginals;
};

/// Exhaustive linear-domain oracle (long double); only for small test graphs
/// with moderate table entries.
inline BruteForceResult brute_force_marginals(const FactorGraph& g) {
  const std::int32_t nv = g.num_variables();
  std::int64_t states = 1;
  for (std::int32_t i = 0; i < nv; ++i) states *= g.cardinality(i);

  long double z = 0.0L;
  std::vector<std::vector<long double>> acc(nv);
  for (std::int32_t i = 0; i < nv; ++i) acc[i].assign(g.cardinality(i), 0.0L);

  std::vector<std::int32_t> assign(nv, 0);
  for (std::int64_t s = 0; s < states; ++s) {
    long double p = 1.0L;
    for (std::int32_t a = 0; a < g.num_factors(); ++a) {
      const Factor& f = g.factor(a);
      std::int64_t idx = 0;
      std::int64_t stride = 1;
      for (std::size_t k = f.scope.size(); k-- > 0;) {
        idx += assign[f.scope[k]] * stride;
        stride *= g.cardinality(f.scope[k]);
      }
      p *= static_cast<long double>(f.table[idx]);
    }
    z += p;
    for (std::int32_t i = 0; i < nv; ++i) acc[i][assign[i]] += p;
    for (std::int32_t i = nv - 1; i >= 0; --i) {
      if (++assign[i] < g.cardinality(i)) break;
      assign[i] = 0;
    }
  }

  BruteForceResult res;
  res.log_z = static_cast<double>(std::log(z));
  res.marginals.resize(nv);
  for (std::int32_t i = 0; i < nv; ++i) {
    res.marginals[i].resize(acc[i].size());
    for (std::size_t x = 0; x < acc[i].size(); ++x)
      res.marginals[i][x] = static_cast<double>(acc[i][x] / z);
  }
  return res;
}

}  // namespace testutil
