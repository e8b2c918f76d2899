#include "loopybp/propagation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace loopybp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

inline void normalize_log(std::span<double> v) {
  const double lse = log_sum_exp(v);
  for (double& x : v) x -= lse;
}

}  // namespace

MessageState::MessageState(const FactorGraph& g) {
  const EdgeId ne = g.num_edges();
  offsets_.resize(ne + 1);
  offsets_[0] = 0;
  for (EdgeId e = 0; e < ne; ++e)
    offsets_[e + 1] = offsets_[e] + g.cardinality(g.edge(e).variable);
  data_.resize(offsets_[ne]);
  versions_.assign(ne, 0);
  for (EdgeId e = 0; e < ne; ++e) {
    auto m = mutable_message(e);
    const double u = -std::log(static_cast<double>(m.size()));
    std::fill(m.begin(), m.end(), u);
  }
}

MessageState init_uniform(const FactorGraph& g) { return MessageState(g); }

std::vector<double> compute_update(const FactorGraph& g, const MessageState& msgs, EdgeId e,
                                   double& raw_log_scale) {
  const Edge& ed = g.edge(e);
  const std::int32_t card = g.cardinality(ed.variable);
  std::vector<double> out;

  if (ed.src.kind == NodeKind::variable) {
    // Product of the other factors' messages into this variable.
    const std::int32_t i = ed.src.index;
    out.assign(card, 0.0);
    const auto facs = g.factors_of(i);
    for (std::size_t k = 0; k < facs.size(); ++k) {
      if (facs[k] == ed.dst.index) continue;
      const auto m = msgs.message(g.incoming_var_at(i, static_cast<std::int32_t>(k)));
      for (std::int32_t x = 0; x < card; ++x) out[x] += m[x];
    }
    const double lse = log_sum_exp(out);
    for (double& x : out) x -= lse;
    raw_log_scale = lse;
    return out;
  }

  // Factor source: marginalize the table times the other incoming messages.
  const std::int32_t a = ed.src.index;
  const auto logt = g.log_table(a);
  const auto strides = g.strides(a);
  const auto& scope = g.factor(a).scope;
  const auto arity = static_cast<std::int32_t>(scope.size());

  std::vector<std::span<const double>> in(arity);
  for (std::int32_t p = 0; p < arity; ++p) {
    if (p == ed.scope_pos) continue;
    in[p] = msgs.message(g.incoming_at(a, p));
  }

  out.assign(card, kNegInf);
  const std::int64_t states = g.joint_states(a);
  for (std::int64_t idx = 0; idx < states; ++idx) {
    double v = logt[idx];
    std::int32_t xi = 0;
    for (std::int32_t p = 0; p < arity; ++p) {
      const auto xp = static_cast<std::int32_t>((idx / strides[p]) % g.cardinality(scope[p]));
      if (p == ed.scope_pos)
        xi = xp;
      else
        v += in[p][xp];
    }
    out[xi] = log_add(out[xi], v);
  }
  const double lse = log_sum_exp(out);
  for (double& x : out) x -= lse;
  raw_log_scale = lse - g.log_table_sum(a);
  return out;
}

std::vector<double> compute_update(const FactorGraph& g, const MessageState& msgs, EdgeId e) {
  double scale = 0.0;
  return compute_update(g, msgs, e, scale);
}

double initial_raw_log_scale(const FactorGraph& g, EdgeId e) {
  const Edge& ed = g.edge(e);
  if (ed.src.kind == NodeKind::variable) {
    // Product of degree-1 uniform messages over the variable's states.
    const double logk = std::log(static_cast<double>(g.cardinality(ed.variable)));
    return (2.0 - g.degree(ed.src)) * logk;
  }
  // Uniform normalized table marginalized against uniform incoming messages.
  double s = 0.0;
  const auto& scope = g.factor(ed.src.index).scope;
  for (std::size_t p = 0; p < scope.size(); ++p) {
    if (static_cast<std::int32_t>(p) == ed.scope_pos) continue;
    s -= std::log(static_cast<double>(g.cardinality(scope[p])));
  }
  return s;
}

std::span<const double> apply_update(MessageState& msgs, EdgeId e,
                                     std::span<const double> new_msg, double damping) {
  auto stored = msgs.mutable_message(e);
  assert(new_msg.size() == stored.size());
  if (damping <= 0.0) {
    std::copy(new_msg.begin(), new_msg.end(), stored.begin());
  } else {
    const double log_new = std::log1p(-damping);  // log(1 - damping)
    const double log_old = std::log(damping);
    for (std::size_t x = 0; x < stored.size(); ++x)
      stored[x] = log_add(log_new + new_msg[x], log_old + stored[x]);
    normalize_log(stored);
  }
  ++msgs.versions_[e];
  return stored;
}

double residual(std::span<const double> old_msg, std::span<const double> new_msg) {
  assert(old_msg.size() == new_msg.size());
  double r = 0.0;
  for (std::size_t x = 0; x < old_msg.size(); ++x)
    r = std::max(r, std::abs(new_msg[x] - old_msg[x]));
  return r;
}

double dynamic_range(std::span<const double> old_msg, std::span<const double> new_msg) {
  assert(old_msg.size() == new_msg.size());
  double hi = kNegInf, lo = -kNegInf;
  for (std::size_t x = 0; x < old_msg.size(); ++x) {
    const double d = new_msg[x] - old_msg[x];
    hi = std::max(hi, d);
    lo = std::min(lo, d);
  }
  return hi - lo;
}

double message_kl(std::span<const double> p_msg, std::span<const double> q_msg) {
  assert(p_msg.size() == q_msg.size());
  double kl = 0.0;
  for (std::size_t x = 0; x < p_msg.size(); ++x) {
    const double p = std::exp(p_msg[x]);
    if (p > 0.0) kl += p * (p_msg[x] - q_msg[x]);
  }
  return std::max(kl, 0.0);
}

ErrorMetrics error_metrics(std::span<const double> old_msg, std::span<const double> new_msg) {
  return {residual(old_msg, new_msg), dynamic_range(old_msg, new_msg),
          message_kl(old_msg, new_msg)};
}

Belief variable_belief(const FactorGraph& g, const MessageState& msgs, std::int32_t i) {
  const std::int32_t card = g.cardinality(i);
  std::vector<double> logb(card, 0.0);
  const auto facs = g.factors_of(i);
  for (std::size_t k = 0; k < facs.size(); ++k) {
    const auto m = msgs.message(g.incoming_var_at(i, static_cast<std::int32_t>(k)));
    for (std::int32_t x = 0; x < card; ++x) logb[x] += m[x];
  }
  normalize_log(logb);
  for (double& x : logb) x = std::exp(x);
  return {NodeRef::var(i), std::move(logb)};
}

Belief factor_belief(const FactorGraph& g, const MessageState& msgs, std::int32_t a) {
  const auto logt = g.log_table(a);
  const auto strides = g.strides(a);
  const auto& scope = g.factor(a).scope;
  const auto arity = static_cast<std::int32_t>(scope.size());
  std::vector<std::span<const double>> in(arity);
  for (std::int32_t p = 0; p < arity; ++p) in[p] = msgs.message(g.incoming_at(a, p));

  std::vector<double> logb(logt.begin(), logt.end());
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(logb.size()); ++idx)
    for (std::int32_t p = 0; p < arity; ++p)
      logb[idx] += in[p][(idx / strides[p]) % g.cardinality(scope[p])];
  normalize_log(logb);
  for (double& x : logb) x = std::exp(x);
  return {NodeRef::fac(a), std::move(logb)};
}

double bethe_term(const FactorGraph& g, const MessageState& msgs, NodeRef n) {
  if (n.kind == NodeKind::variable) {
    const Belief b = variable_belief(g, msgs, n.index);
    double h = 0.0;
    for (double p : b.distribution)
      if (p > 0.0) h += p * std::log(p);
    return (1.0 - g.degree(n)) * h;
  }
  const Belief b = factor_belief(g, msgs, n.index);
  const auto logt = g.log_table(n.index);
  double term = 0.0;
  for (std::size_t k = 0; k < b.distribution.size(); ++k) {
    const double p = b.distribution[k];
    if (p > 0.0) term += p * (std::log(p) - logt[k]);
  }
  return term;
}

double bethe_log_z(const FactorGraph& g, const MessageState& msgs) {
  double f = 0.0;
  for (std::int32_t a = 0; a < g.num_factors(); ++a) f += bethe_term(g, msgs, NodeRef::fac(a));
  for (std::int32_t i = 0; i < g.num_variables(); ++i)
    f += bethe_term(g, msgs, NodeRef::var(i));
  return -f;
}

double factor_change_bound(std::span<const double> old_table,
                           std::span<const double> new_table) {
  if (old_table.size() != new_table.size())
    throw ShapeMismatch("factor tables differ in size: " + std::to_string(old_table.size()) +
                        " vs " + std::to_string(new_table.size()));
  double bound = 0.0;
  for (std::size_t k = 0; k < old_table.size(); ++k) {
    const double o = old_table[k], n = new_table[k];
    if (!(o > 0.0) || !(n > 0.0) || !std::isfinite(o) || !std::isfinite(n))
      throw NonPositiveEntry("factor_change_bound requires strictly positive finite tables");
    bound = std::max(bound, std::abs(std::log(n / o)));
  }
  return bound;
}

double initial_priority(const FactorGraph& g, NodeRef n) {
  if (n.kind == NodeKind::variable) return 0.0;
  const auto logt = g.log_table(n.index);
  const double lse = g.log_table_sum(n.index);
  const double logk = std::log(static_cast<double>(logt.size()));
  double bound = 0.0;
  for (double lt : logt) bound = std::max(bound, std::abs(lt - lse + logk));
  return bound;
}

}  // namespace loopybp
