#include "loopybp/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace loopybp {

namespace {

double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

}  // namespace

FactorGraph::FactorGraph(std::vector<VariableSpec> variables, std::vector<Factor> factors) {
  const auto nv = static_cast<std::int32_t>(variables.size());
  cards_.resize(nv);
  for (std::int32_t i = 0; i < nv; ++i) {
    const VariableSpec& v = variables[i];
    if (v.id != i)
      throw InvalidModel("variable ids must be dense 0..V-1, got id " + std::to_string(v.id) +
                         " at position " + std::to_string(i));
    if (v.cardinality < 1)
      throw InvalidModel("variable " + std::to_string(i) + " has cardinality " +
                         std::to_string(v.cardinality));
    cards_[i] = v.cardinality;
  }

  const auto nf = static_cast<std::int32_t>(factors.size());
  var_factors_.resize(nv);
  log_tables_.resize(nf);
  log_table_sums_.resize(nf);
  strides_.resize(nf);
  for (std::int32_t a = 0; a < nf; ++a) {
    Factor& f = factors[a];
    if (f.id != a)
      throw InvalidModel("factor ids must be dense 0..F-1, got id " + std::to_string(f.id) +
                         " at position " + std::to_string(a));
    std::int64_t size = 1;
    for (std::int32_t j : f.scope) {
      if (j < 0 || j >= nv)
        throw UnknownVariable("factor " + std::to_string(a) + " references variable " +
                              std::to_string(j));
      size *= cards_[j];
    }
    for (std::size_t p = 0; p + 1 < f.scope.size(); ++p)
      for (std::size_t q = p + 1; q < f.scope.size(); ++q)
        if (f.scope[p] == f.scope[q])
          throw ScopeMismatch("factor " + std::to_string(a) + " repeats variable " +
                              std::to_string(f.scope[p]) + " in its scope");
    if (static_cast<std::int64_t>(f.table.size()) != size)
      throw ScopeMismatch("factor " + std::to_string(a) + " table has " +
                          std::to_string(f.table.size()) + " entries, scope implies " +
                          std::to_string(size));
    auto& logt = log_tables_[a];
    logt.resize(f.table.size());
    for (std::size_t k = 0; k < f.table.size(); ++k) {
      const double t = f.table[k];
      if (!(t > 0.0) || !std::isfinite(t))
        throw NonPositiveEntry("factor " + std::to_string(a) + " entry " + std::to_string(k) +
                               " is " + std::to_string(t) + "; entries must be finite and > 0");
      logt[k] = std::log(t);
    }
    log_table_sums_[a] = log_sum_exp(logt);

    // Row-major layout, last scope variable fastest.
    auto& st = strides_[a];
    st.assign(f.scope.size(), 1);
    for (std::size_t p = f.scope.size(); p-- > 1;)
      st[p - 1] = st[p] * cards_[f.scope[p]];

    for (std::int32_t j : f.scope) var_factors_[j].push_back(a);
  }
  factors_ = std::move(factors);
  for (auto& fs : var_factors_) std::sort(fs.begin(), fs.end());

  // Directed edges: variable sources first (var id, then factor id), then
  // factor sources (factor id, then variable id).
  var_out_.resize(nv);
  var_in_.resize(nv);
  fac_out_.resize(nf);
  fac_in_.resize(nf);
  for (std::int32_t i = 0; i < nv; ++i) {
    for (std::int32_t a : var_factors_[i]) {
      Edge e;
      e.src = NodeRef::var(i);
      e.dst = NodeRef::fac(a);
      e.variable = i;
      e.reverse = -1;
      e.scope_pos = -1;
      e.pos_in_src = static_cast<std::int32_t>(var_out_[i].size());
      var_out_[i].push_back(static_cast<EdgeId>(edges_.size()));
      edges_.push_back(e);
    }
  }
  for (std::int32_t a = 0; a < nf; ++a) {
    std::vector<std::int32_t> targets(factors_[a].scope.begin(), factors_[a].scope.end());
    std::sort(targets.begin(), targets.end());
    fac_in_[a].assign(factors_[a].scope.size(), -1);
    for (std::int32_t i : targets) {
      Edge e;
      e.src = NodeRef::fac(a);
      e.dst = NodeRef::var(i);
      e.variable = i;
      e.reverse = -1;
      const auto& scope = factors_[a].scope;
      e.scope_pos = static_cast<std::int32_t>(
          std::find(scope.begin(), scope.end(), i) - scope.begin());
      e.pos_in_src = static_cast<std::int32_t>(fac_out_[a].size());
      fac_out_[a].push_back(static_cast<EdgeId>(edges_.size()));
      edges_.push_back(e);
    }
  }

  // Wire reverse edges and the incoming lookup tables.
  for (std::int32_t i = 0; i < nv; ++i) {
    var_in_[i].resize(var_factors_[i].size());
    for (std::size_t k = 0; k < var_out_[i].size(); ++k) {
      const EdgeId out = var_out_[i][k];
      const std::int32_t a = edges_[out].dst.index;
      const auto& fo = fac_out_[a];
      // fac_out_[a] is sorted by destination variable id.
      auto it = std::lower_bound(fo.begin(), fo.end(), i, [&](EdgeId e, std::int32_t var) {
        return edges_[e].variable < var;
      });
      const EdgeId in = *it;
      edges_[out].reverse = in;
      edges_[in].reverse = out;
      edges_[out].scope_pos = edges_[in].scope_pos;
      var_in_[i][k] = in;
      fac_in_[a][edges_[in].scope_pos] = out;
    }
  }
}

std::int32_t FactorGraph::degree(NodeRef n) const {
  if (n.kind == NodeKind::variable)
    return static_cast<std::int32_t>(var_factors_[n.index].size());
  return static_cast<std::int32_t>(factors_[n.index].scope.size());
}

std::span<const EdgeId> FactorGraph::outgoing(NodeRef n) const {
  if (n.kind == NodeKind::variable) return var_out_[n.index];
  return fac_out_[n.index];
}

EdgeId FactorGraph::edge_between(NodeRef from, NodeRef to) const {
  for (EdgeId e : outgoing(from))
    if (edges_[e].dst == to) return e;
  throw UnknownVariable("nodes are not adjacent");
}

FactorGraph build_graph(std::vector<VariableSpec> variables, std::vector<Factor> factors) {
  return FactorGraph(std::move(variables), std::move(factors));
}

}  // namespace loopybp
