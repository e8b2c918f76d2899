#include "loopybp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace loopybp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kEnumerationCap = std::int64_t{1} << 22;
constexpr std::int64_t kEliminationCap = std::int64_t{1} << 24;

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_sum_exp(const std::vector<double>& v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

/// Log-domain function over a sorted set of variables, last variable fastest.
struct LogFunction {
  std::vector<std::int32_t> vars;  // ascending
  std::vector<double> values;
};

std::int64_t table_size(const FactorGraph& g, const std::vector<std::int32_t>& vars) {
  std::int64_t s = 1;
  for (std::int32_t v : vars) {
    s *= g.cardinality(v);
    if (s > kEliminationCap) return -1;
  }
  return s;
}

/// Factor table rewritten over its sorted scope.
LogFunction to_sorted_function(const FactorGraph& g, std::int32_t a) {
  const Factor& f = g.factor(a);
  LogFunction out;
  out.vars = f.scope;
  std::sort(out.vars.begin(), out.vars.end());
  const auto logt = g.log_table(a);
  if (out.vars == f.scope) {
    out.values.assign(logt.begin(), logt.end());
    return out;
  }
  const auto arity = static_cast<std::int32_t>(f.scope.size());
  std::vector<std::int64_t> out_strides(arity, 1);
  for (std::int32_t p = arity - 1; p > 0; --p)
    out_strides[p - 1] = out_strides[p] * g.cardinality(out.vars[p]);
  const auto in_strides = g.strides(a);
  // Position of each sorted variable within the original scope.
  std::vector<std::int32_t> scope_pos(arity);
  for (std::int32_t p = 0; p < arity; ++p)
    scope_pos[p] = static_cast<std::int32_t>(
        std::find(f.scope.begin(), f.scope.end(), out.vars[p]) - f.scope.begin());
  out.values.resize(logt.size());
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(logt.size()); ++idx) {
    std::int64_t src = 0;
    for (std::int32_t p = 0; p < arity; ++p) {
      const auto x = (idx / out_strides[p]) % g.cardinality(out.vars[p]);
      src += x * in_strides[scope_pos[p]];
    }
    out.values[idx] = logt[src];
  }
  return out;
}

/// Multiplies the inputs over the union of their variables, then sums out
/// `eliminate` (or keeps everything if eliminate < 0). Adds any scale shift
/// it removes to *scale_accum.
LogFunction multiply_and_eliminate(const FactorGraph& g, const std::vector<LogFunction>& inputs,
                                   std::int32_t eliminate, double* scale_accum) {
  std::vector<std::int32_t> uni;
  for (const auto& f : inputs) {
    for (std::int32_t v : f.vars)
      if (!std::binary_search(uni.begin(), uni.end(), v)) {
        uni.insert(std::upper_bound(uni.begin(), uni.end(), v), v);
      }
  }
  const std::int64_t prod_size = table_size(g, uni);
  if (prod_size < 0)
    throw WidthTooLarge("intermediate table exceeds 2^24 entries; use a better order");

  const auto nu = static_cast<std::int32_t>(uni.size());
  std::vector<std::int64_t> strides(nu, 1);
  for (std::int32_t p = nu - 1; p > 0; --p)
    strides[p - 1] = strides[p] * g.cardinality(uni[p]);

  // Per input: stride of each union variable within that input (0 if absent).
  std::vector<std::vector<std::int64_t>> in_strides(inputs.size(),
                                                    std::vector<std::int64_t>(nu, 0));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto& f = inputs[k];
    std::vector<std::int64_t> fs(f.vars.size(), 1);
    for (std::size_t p = f.vars.size(); p-- > 1;)
      fs[p - 1] = fs[p] * g.cardinality(f.vars[p]);
    for (std::size_t p = 0; p < f.vars.size(); ++p) {
      const auto at = std::lower_bound(uni.begin(), uni.end(), f.vars[p]) - uni.begin();
      in_strides[k][at] = fs[p];
    }
  }

  std::vector<double> prod(prod_size, 0.0);
  std::vector<std::int32_t> digits(nu, 0);
  std::vector<std::int64_t> offsets(inputs.size(), 0);
  for (std::int64_t idx = 0; idx < prod_size; ++idx) {
    double v = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) v += inputs[k].values[offsets[k]];
    prod[idx] = v;
    // Odometer increment, last variable fastest.
    for (std::int32_t p = nu - 1; p >= 0; --p) {
      ++digits[p];
      for (std::size_t k = 0; k < inputs.size(); ++k) offsets[k] += in_strides[k][p];
      if (digits[p] < g.cardinality(uni[p])) break;
      for (std::size_t k = 0; k < inputs.size(); ++k)
        offsets[k] -= in_strides[k][p] * g.cardinality(uni[p]);
      digits[p] = 0;
    }
  }

  LogFunction out;
  if (eliminate < 0) {
    out.vars = std::move(uni);
    out.values = std::move(prod);
  } else {
    const auto at = static_cast<std::int32_t>(
        std::lower_bound(uni.begin(), uni.end(), eliminate) - uni.begin());
    const std::int32_t card = g.cardinality(eliminate);
    out.vars = uni;
    out.vars.erase(out.vars.begin() + at);
    const std::int64_t out_size = prod_size / card;
    out.values.assign(out_size, kNegInf);
    const std::int64_t inner = strides[at];              // stride of the eliminated var
    const std::int64_t outer = prod_size / (inner * card);
    std::int64_t w = 0;
    for (std::int64_t o = 0; o < outer; ++o) {
      const std::int64_t base = o * inner * card;
      for (std::int64_t in = 0; in < inner; ++in, ++w) {
        double acc = kNegInf;
        for (std::int32_t x = 0; x < card; ++x)
          acc = log_add(acc, prod[base + x * inner + in]);
        out.values[w] = acc;
      }
    }
  }

  // Rescale so downstream products stay in range; the shift is restored when
  // the run's constants are collected.
  double hi = kNegInf;
  for (double x : out.values) hi = std::max(hi, x);
  if (hi != kNegInf && std::isfinite(hi) && hi != 0.0) {
    for (double& x : out.values) x -= hi;
    *scale_accum += hi;
  }
  return out;
}

void check_order(const FactorGraph& g, const std::vector<std::int32_t>& order) {
  if (static_cast<std::int32_t>(order.size()) != g.num_variables())
    throw Error("elimination order must list every variable exactly once");
  std::vector<bool> seen(g.num_variables(), false);
  for (std::int32_t v : order) {
    if (v < 0 || v >= g.num_variables() || seen[v])
      throw Error("elimination order must be a permutation of the variable ids");
    seen[v] = true;
  }
}

/// Runs one elimination pass in the given order. If `query` >= 0 it must be
/// order.back(); returns its marginal in *marginal. Returns log Z.
double eliminate_pass(const FactorGraph& g, const std::vector<std::int32_t>& order,
                      std::int32_t query, std::vector<double>* marginal) {
  const std::int32_t nv = g.num_variables();
  std::vector<std::int32_t> position(nv);
  for (std::int32_t k = 0; k < nv; ++k) position[order[k]] = k;

  // Bucket of the earliest-eliminated variable of each function.
  std::vector<std::vector<LogFunction>> buckets(nv);
  double scale = 0.0;
  double constants = 0.0;
  auto place = [&](LogFunction&& f) {
    if (f.vars.empty()) {
      constants += f.values[0];
      return;
    }
    std::int32_t first = f.vars[0];
    for (std::int32_t v : f.vars)
      if (position[v] < position[first]) first = v;
    buckets[position[first]].push_back(std::move(f));
  };
  for (std::int32_t a = 0; a < g.num_factors(); ++a) place(to_sorted_function(g, a));

  const std::int32_t last = (query >= 0) ? nv - 1 : nv;
  for (std::int32_t k = 0; k < last; ++k) {
    const std::int32_t v = order[k];
    if (buckets[k].empty()) {
      // A variable no remaining function mentions sums to its cardinality.
      constants += std::log(static_cast<double>(g.cardinality(v)));
      continue;
    }
    place(multiply_and_eliminate(g, buckets[k], v, &scale));
    buckets[k].clear();
  }

  if (query < 0) return scale + constants;

  // Everything left ranges over the query variable only.
  std::vector<double> logm(g.cardinality(query), 0.0);
  for (const auto& f : buckets[nv - 1]) {
    for (std::size_t x = 0; x < logm.size(); ++x) logm[x] += f.values[x];
  }
  const double lse = log_sum_exp(logm);
  marginal->resize(logm.size());
  for (std::size_t x = 0; x < logm.size(); ++x) (*marginal)[x] = std::exp(logm[x] - lse);
  return scale + constants + lse;
}

}  // namespace

ExactResult enumerate_marginals(const FactorGraph& g) {
  const std::int32_t nv = g.num_variables();
  std::int64_t states = 1;
  for (std::int32_t i = 0; i < nv; ++i) {
    states *= g.cardinality(i);
    if (states > kEnumerationCap)
      throw TooLarge("joint state space exceeds 2^22; use eliminate_marginals");
  }

  ExactResult res;
  res.marginals.resize(nv);
  std::vector<std::vector<double>> acc(nv);
  for (std::int32_t i = 0; i < nv; ++i) acc[i].assign(g.cardinality(i), kNegInf);

  std::vector<std::int32_t> assign(nv, 0);
  double log_z = kNegInf;
  for (std::int64_t s = 0; s < states; ++s) {
    double lp = 0.0;
    for (std::int32_t a = 0; a < g.num_factors(); ++a) {
      const Factor& f = g.factor(a);
      const auto strides = g.strides(a);
      std::int64_t idx = 0;
      for (std::size_t p = 0; p < f.scope.size(); ++p) idx += assign[f.scope[p]] * strides[p];
      lp += g.log_table(a)[idx];
    }
    log_z = log_add(log_z, lp);
    for (std::int32_t i = 0; i < nv; ++i) acc[i][assign[i]] = log_add(acc[i][assign[i]], lp);
    for (std::int32_t i = nv - 1; i >= 0; --i) {
      if (++assign[i] < g.cardinality(i)) break;
      assign[i] = 0;
    }
  }
  res.log_z = log_z;
  for (std::int32_t i = 0; i < nv; ++i) {
    res.marginals[i].resize(acc[i].size());
    for (std::size_t x = 0; x < acc[i].size(); ++x)
      res.marginals[i][x] = std::exp(acc[i][x] - log_z);
  }
  return res;
}

ExactResult eliminate_marginals(const FactorGraph& g, const std::vector<std::int32_t>& order) {
  check_order(g, order);
  ExactResult res;
  res.marginals.resize(g.num_variables());
  if (g.num_variables() == 0) {
    res.log_z = eliminate_pass(g, order, -1, nullptr);
    return res;
  }
  bool have_log_z = false;
  for (std::int32_t q = 0; q < g.num_variables(); ++q) {
    std::vector<std::int32_t> qorder;
    qorder.reserve(order.size());
    for (std::int32_t v : order)
      if (v != q) qorder.push_back(v);
    qorder.push_back(q);
    const double lz = eliminate_pass(g, qorder, q, &res.marginals[q]);
    if (!have_log_z) {
      res.log_z = lz;
      have_log_z = true;
    }
  }
  return res;
}

ExactResult eliminate_marginals(const FactorGraph& g) {
  std::vector<std::int32_t> order(g.num_variables());
  std::iota(order.begin(), order.end(), 0);
  return eliminate_marginals(g, order);
}

double avg_variable_kl(const ExactResult& exact, const std::vector<Belief>& beliefs) {
  if (beliefs.size() != exact.marginals.size())
    throw MissingVariable("need one belief per variable: " + std::to_string(beliefs.size()) +
                          " beliefs vs " + std::to_string(exact.marginals.size()) +
                          " marginals");
  if (exact.marginals.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    const auto& b = beliefs[i];
    if (b.target.kind != NodeKind::variable ||
        b.target.index != static_cast<std::int32_t>(i) ||
        b.distribution.size() != exact.marginals[i].size())
      throw MissingVariable("belief " + std::to_string(i) + " does not match variable " +
                            std::to_string(i));
    double kl = 0.0;
    for (std::size_t x = 0; x < b.distribution.size(); ++x) {
      const double p = exact.marginals[i][x];
      if (p > 0.0) kl += p * (std::log(p) - std::log(b.distribution[x]));
    }
    total += std::max(kl, 0.0);
  }
  return total / static_cast<double>(beliefs.size());
}

}  // namespace loopybp
