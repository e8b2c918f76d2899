#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loopybp/errors.hpp"

namespace loopybp {

/// Dense index of a directed edge (variable->factor or factor->variable).
using EdgeId = std::int32_t;

enum class NodeKind : std::uint8_t { variable = 0, factor = 1 };

/// Handle for either side of the bipartite graph.
struct NodeRef {
  NodeKind kind;
  std::int32_t index;

  static NodeRef var(std::int32_t i) { return {NodeKind::variable, i}; }
  static NodeRef fac(std::int32_t a) { return {NodeKind::factor, a}; }
  bool operator==(const NodeRef&) const = default;
};

struct VariableSpec {
  std::int32_t id = 0;
  std::int32_t cardinality = 0;  // number of states, >= 1
};

/// A discrete factor: an ordered scope of distinct variables and a strictly
/// positive table over their joint states, flattened row-major with the last
/// scope variable varying fastest.
struct Factor {
  std::int32_t id = 0;
  std::vector<std::int32_t> scope;
  std::vector<double> table;
};

/// One directed edge of the bipartite graph.
struct Edge {
  NodeRef src;
  NodeRef dst;
  std::int32_t variable;    // the variable endpoint (message domain)
  EdgeId reverse;           // the opposite direction of the same adjacency
  std::int32_t scope_pos;   // position of `variable` in the factor's scope
  std::int32_t pos_in_src;  // index of this edge within outgoing(src)
};

/// Immutable discrete factor graph with dense directed-edge numbering.
///
/// Edges are numbered deterministically: all variable-source edges first
/// (by variable id, then destination factor id), then all factor-source
/// edges (by factor id, then destination variable id). Log tables are
/// precomputed once here so the propagation layer never touches the linear
/// domain.
class FactorGraph {
 public:
  FactorGraph(std::vector<VariableSpec> variables, std::vector<Factor> factors);

  std::int32_t num_variables() const { return static_cast<std::int32_t>(cards_.size()); }
  std::int32_t num_factors() const { return static_cast<std::int32_t>(factors_.size()); }
  EdgeId num_edges() const { return static_cast<EdgeId>(edges_.size()); }

  std::int32_t cardinality(std::int32_t i) const { return cards_[i]; }
  const Factor& factor(std::int32_t a) const { return factors_[a]; }
  const std::vector<Factor>& factors() const { return factors_; }

  std::span<const double> log_table(std::int32_t a) const { return log_tables_[a]; }
  /// log of the sum of the factor's table entries (normalizer of the table).
  double log_table_sum(std::int32_t a) const { return log_table_sums_[a]; }
  std::span<const std::int64_t> strides(std::int32_t a) const { return strides_[a]; }
  std::int64_t joint_states(std::int32_t a) const {
    return static_cast<std::int64_t>(log_tables_[a].size());
  }

  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }

  /// Factors containing variable i, ascending by factor id.
  std::span<const std::int32_t> factors_of(std::int32_t i) const { return var_factors_[i]; }
  std::int32_t degree(NodeRef n) const;

  /// Outgoing directed edges of a node, in edge-numbering order.
  std::span<const EdgeId> outgoing(NodeRef n) const;
  /// Edge (scope[p] -> a), aligned with the factor's scope positions.
  EdgeId incoming_at(std::int32_t a, std::int32_t scope_pos) const {
    return fac_in_[a][scope_pos];
  }
  /// Edge (factors_of(i)[k] -> i), aligned with factors_of(i).
  EdgeId incoming_var_at(std::int32_t i, std::int32_t k) const { return var_in_[i][k]; }

  /// Directed edge between two adjacent nodes; throws UnknownVariable if the
  /// nodes are not adjacent.
  EdgeId edge_between(NodeRef from, NodeRef to) const;

 private:
  std::vector<std::int32_t> cards_;
  std::vector<Factor> factors_;
  std::vector<std::vector<double>> log_tables_;
  std::vector<double> log_table_sums_;
  std::vector<std::vector<std::int64_t>> strides_;
  std::vector<std::vector<std::int32_t>> var_factors_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> var_out_;
  std::vector<std::vector<EdgeId>> fac_out_;
  std::vector<std::vector<EdgeId>> fac_in_;  // aligned with scope
  std::vector<std::vector<EdgeId>> var_in_;  // aligned with var_factors_
};

/// Validates and assembles a graph; see FactorGraph for the edge numbering.
FactorGraph build_graph(std::vector<VariableSpec> variables, std::vector<Factor> factors);

/// Random n x n grid of binary variables: one unary factor [1, e^-u] per
/// variable and one pairwise factor [[1, e^-a], [e^-a, 1]] per horizontal and
/// vertical adjacency, with u and a drawn uniformly from [-c, c]. Factors are
/// created (and draws consumed) in the order: unaries row-major, horizontal
/// pairs row-major, vertical pairs row-major. Deterministic in (n, c, seed)
/// within one build of the library; the generator is std::mt19937_64.
FactorGraph gen_potts_grid(std::int32_t n, double c, std::uint64_t seed);

/// Name of the RNG behind gen_potts_grid, for experiment provenance.
std::string potts_generator_name();

}  // namespace loopybp
