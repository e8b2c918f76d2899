#pragma once

#include <cstdint>
#include <vector>

#include "loopybp/factor_graph.hpp"
#include "loopybp/propagation.hpp"

namespace loopybp {

struct ExactResult {
  double log_z = 0.0;
  std::vector<std::vector<double>> marginals;  // per variable, sums to 1
};

/// Exhaustive log-domain sum over all joint states. Guarded: the joint state
/// space must not exceed 2^22.
ExactResult enumerate_marginals(const FactorGraph& g);

/// Variable elimination in the log domain; intermediate tables are rescaled
/// with the scale folded into log_z. Marginals are obtained by one
/// elimination pass per variable with the query variable eliminated last.
/// `order` must be a permutation of all variable ids; the largest
/// intermediate table is capped at 2^24 entries.
ExactResult eliminate_marginals(const FactorGraph& g, const std::vector<std::int32_t>& order);

/// Elimination in id order (0..V-1); on the row-major grids this has induced
/// width n.
ExactResult eliminate_marginals(const FactorGraph& g);

/// Mean over variables of KL(exact marginal || belief).
double avg_variable_kl(const ExactResult& exact, const std::vector<Belief>& beliefs);

}  // namespace loopybp
