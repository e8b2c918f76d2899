#include "loopybp/schedulers.hpp"

#include <chrono>
#include <cmath>

#include "loopybp/indexed_pq.hpp"

namespace loopybp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t divergence_cutoff(const FactorGraph& g, const RunOptions& opts) {
  return static_cast<std::uint64_t>(opts.max_sweeps) * static_cast<std::uint64_t>(g.num_edges());
}

void validate(const RunOptions& opts) {
  if (!(opts.tolerance > 0.0)) throw Error("tolerance must be > 0");
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) throw Error("damping must be in [0, 1)");
  if (opts.max_sweeps < 1) throw Error("max_sweeps must be >= 1");
}

RunStats make_stats(const FactorGraph& g, const RunOptions& opts) {
  RunStats st;
  st.schedule = schedule_name(opts.schedule);
  st.seed = opts.seed;
  st.model_id = opts.model_id;
  st.sweeps_equivalent = 0.0;
  (void)g;
  return st;
}

void finish_stats(RunStats& st, const FactorGraph& g, Clock::time_point t0) {
  st.wall_time_s = seconds_since(t0);
  st.sweeps_equivalent =
      g.num_edges() > 0 ? static_cast<double>(st.messages_computed) / g.num_edges() : 0.0;
}

/// Accumulated residuals feeding each edge since it last fired. Slot k of
/// edge (b,c) holds the total residual of the reverse of outgoing(b)[k],
/// i.e. of the incoming message along that adjacency; the slot of (b,c)'s
/// own reverse stays zero.
class ResidualLedger {
 public:
  explicit ResidualLedger(const FactorGraph& g) : sum_(g.num_edges(), 0.0) {
    acc_.resize(g.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      acc_[e].assign(g.degree(g.edge(e).src), 0.0);
  }

  double sum(EdgeId e) const { return sum_[e]; }

  void add(EdgeId e, std::int32_t slot, double r) {
    acc_[e][slot] += r;
    sum_[e] += r;
  }

  void reset(EdgeId e) {
    std::fill(acc_[e].begin(), acc_[e].end(), 0.0);
    sum_[e] = 0.0;
  }

 private:
  std::vector<std::vector<double>> acc_;
  std::vector<double> sum_;
};

}  // namespace

std::string schedule_name(Schedule s) {
  switch (s) {
    case Schedule::synchronous: return "synchronous";
    case Schedule::round_robin: return "round_robin";
    case Schedule::rbp1l: return "rbp1l";
    case Schedule::rbp0l: return "rbp0l";
  }
  return "?";
}

Schedule schedule_from_name(const std::string& name) {
  if (name == "synchronous") return Schedule::synchronous;
  if (name == "round_robin") return Schedule::round_robin;
  if (name == "rbp1l") return Schedule::rbp1l;
  if (name == "rbp0l") return Schedule::rbp0l;
  throw Error("unknown schedule '" + name +
              "' (expected synchronous, round_robin, rbp1l or rbp0l)");
}

std::pair<MessageState, RunStats> run_synchronous(const FactorGraph& g, const RunOptions& opts) {
  const auto t0 = Clock::now();
  validate(opts);
  MessageState msgs(g);
  RunStats st = make_stats(g, opts);
  const EdgeId ne = g.num_edges();
  const std::uint64_t cutoff = divergence_cutoff(g, opts);

  std::vector<std::vector<double>> fresh(ne);
  std::vector<double> old_buf;
  while (!st.converged && st.messages_computed < cutoff && ne > 0) {
    // Compute every update against the frozen state, then perform them all.
    for (EdgeId e = 0; e < ne; ++e) {
      fresh[e] = compute_update(g, msgs, e);
      ++st.messages_computed;
    }
    double max_r = 0.0;
    for (EdgeId e = 0; e < ne; ++e) {
      const auto old = msgs.message(e);
      old_buf.assign(old.begin(), old.end());
      const auto stored = apply_update(msgs, e, fresh[e], opts.damping);
      ++st.messages_performed;
      max_r = std::max(max_r, residual(old_buf, stored));
    }
    st.final_max_residual = max_r;
    if (max_r < opts.tolerance) st.converged = true;
  }
  if (ne == 0) st.converged = true;
  finish_stats(st, g, t0);
  return {std::move(msgs), std::move(st)};
}

std::pair<MessageState, RunStats> run_round_robin(const FactorGraph& g, const RunOptions& opts) {
  const auto t0 = Clock::now();
  validate(opts);
  MessageState msgs(g);
  RunStats st = make_stats(g, opts);
  const EdgeId ne = g.num_edges();
  const std::uint64_t cutoff = divergence_cutoff(g, opts);

  std::vector<double> old_buf;
  while (!st.converged && st.messages_computed < cutoff && ne > 0) {
    double max_r = 0.0;
    for (EdgeId e = 0; e < ne; ++e) {
      const auto fresh = compute_update(g, msgs, e);
      ++st.messages_computed;
      const auto old = msgs.message(e);
      old_buf.assign(old.begin(), old.end());
      const auto stored = apply_update(msgs, e, fresh, opts.damping);
      ++st.messages_performed;
      max_r = std::max(max_r, residual(old_buf, stored));
    }
    st.final_max_residual = max_r;
    if (max_r < opts.tolerance) st.converged = true;
  }
  if (ne == 0) st.converged = true;
  finish_stats(st, g, t0);
  return {std::move(msgs), std::move(st)};
}

std::pair<MessageState, RunStats> run_rbp1l(const FactorGraph& g, const RunOptions& opts) {
  const auto t0 = Clock::now();
  validate(opts);
  MessageState msgs(g);
  RunStats st = make_stats(g, opts);
  const EdgeId ne = g.num_edges();
  const std::uint64_t cutoff = divergence_cutoff(g, opts);

  // Pending precomputed updates, one slot per edge.
  std::vector<std::vector<double>> pending(ne);
  IndexedPriorityQueue q(ne);

  for (EdgeId e = 0; e < ne; ++e) {
    pending[e] = compute_update(g, msgs, e);
    ++st.messages_computed;
    q.insert(e, residual(msgs.message(e), pending[e]));
  }

  std::vector<double> old_buf;
  for (;;) {
    if (q.empty()) {
      st.converged = true;
      st.final_max_residual = 0.0;
      break;
    }
    st.final_max_residual = q.peek_priority();
    if (st.final_max_residual < opts.tolerance) {
      st.converged = true;
      break;
    }
    if (st.messages_computed >= cutoff) break;

    const EdgeId e = q.pop();
    const auto old = msgs.message(e);
    old_buf.assign(old.begin(), old.end());
    const auto stored = apply_update(msgs, e, pending[e], opts.damping);
    ++st.messages_performed;
    if (opts.damping > 0.0) {
      // The damped store did not reach the pending value; the leftover is a
      // true residual of the still-pending update.
      q.replace(e, residual(stored, pending[e]));
    }

    // Recompute every dependent of the performed message and requeue it with
    // its fresh residual; a replaced pending update was computed for nothing.
    const Edge& ed = g.edge(e);
    for (EdgeId dep : g.outgoing(ed.dst)) {
      if (dep == ed.reverse) continue;
      auto fresh = compute_update(g, msgs, dep);
      ++st.messages_computed;
      if (q.contains(dep)) ++st.wasted;
      const double pr = residual(msgs.message(dep), fresh);
      pending[dep] = std::move(fresh);
      q.replace(dep, pr);
    }
  }
  st.pending_at_exit = static_cast<std::uint64_t>(q.size());
  finish_stats(st, g, t0);
  return {std::move(msgs), std::move(st)};
}

std::pair<MessageState, RunStats> run_rbp0l(const FactorGraph& g, const RunOptions& opts,
                                            const Rbp0lInit* init,
                                            const PerformObserver& observer) {
  const auto t0 = Clock::now();
  validate(opts);
  RunStats st = make_stats(g, opts);
  st.schedule = schedule_name(Schedule::rbp0l);
  const EdgeId ne = g.num_edges();
  const std::uint64_t cutoff = divergence_cutoff(g, opts);

  MessageState msgs = init ? init->messages : MessageState(g);
  if (init && (msgs.num_edges() != ne ||
               static_cast<EdgeId>(init->priorities.size()) != ne))
    throw StructureMismatch("warm start does not match the graph");

  ResidualLedger ledger(g);
  IndexedPriorityQueue q(ne);
  for (EdgeId e = 0; e < ne; ++e)
    q.insert(e, init ? init->priorities[e] : initial_priority(g, g.edge(e).src));

  // Residual a damped store is known to leave behind on each edge; it joins
  // the ledger sum in every reprioritization so the gap cannot drop out of
  // the queue. Stays zero without damping.
  std::vector<double> damped_gap(opts.damping > 0.0 ? ne : 0, 0.0);
  const auto queue_priority = [&](EdgeId dep) {
    const double base = damped_gap.empty() ? 0.0 : damped_gap[dep];
    return base + ledger.sum(dep);
  };

  // Raw-ratio bookkeeping for the optional priority-bound check: stored
  // message + offset reproduces the unnormalized update of the last perform.
  const bool check = opts.check_priority_bound && opts.damping == 0.0 && init == nullptr;
  std::vector<double> raw_offset;
  if (check) {
    raw_offset.resize(ne);
    for (EdgeId e = 0; e < ne; ++e) raw_offset[e] = initial_raw_log_scale(g, e);
  }

  std::vector<double> old_buf;
  for (;;) {
    if (q.empty()) {
      st.converged = true;
      st.final_max_residual = 0.0;
      break;
    }
    st.final_max_residual = q.peek_priority();
    if (st.final_max_residual < opts.tolerance) {
      st.converged = true;
      break;
    }
    if (st.messages_computed >= cutoff) break;

    const EdgeId e = q.pop();
    const double priority = st.final_max_residual;  // == priority of e
    double raw_scale = 0.0;
    const auto fresh = compute_update(g, msgs, e, raw_scale);
    ++st.messages_computed;

    if (check) {
      double raw_r = 0.0;
      const auto old = msgs.message(e);
      for (std::size_t x = 0; x < fresh.size(); ++x)
        raw_r = std::max(raw_r, std::abs(fresh[x] + raw_scale - old[x] - raw_offset[e]));
      ++st.bound_checks;
      if (raw_r > priority + 1e-9) {
        ++st.bound_violations;
        st.max_bound_excess = std::max(st.max_bound_excess, raw_r - priority);
      }
      raw_offset[e] = raw_scale;
    }

    const auto old = msgs.message(e);
    old_buf.assign(old.begin(), old.end());
    const auto stored = apply_update(msgs, e, fresh, opts.damping);
    ++st.messages_performed;
    const double r = residual(old_buf, stored);

    // The performed edge has no pending change left: clear what fed it, then
    // charge its own residual to every dependent.
    ledger.reset(e);
    const Edge& ed = g.edge(e);
    const std::int32_t slot = g.edge(ed.reverse).pos_in_src;
    for (EdgeId dep : g.outgoing(ed.dst)) {
      if (dep == ed.reverse) continue;
      ledger.add(dep, slot, r);
      q.replace(dep, queue_priority(dep));
    }

    if (opts.damping > 0.0) {
      // A damped store leaves a known exact residual behind; requeue with it.
      damped_gap[e] = residual(stored, fresh);
      q.replace(e, queue_priority(e));
    }

    if (observer) observer(st.messages_performed, e, old_buf, stored, msgs);
  }
  finish_stats(st, g, t0);
  return {std::move(msgs), std::move(st)};
}

std::pair<MessageState, RunStats> run_schedule(const FactorGraph& g, const RunOptions& opts) {
  switch (opts.schedule) {
    case Schedule::synchronous: return run_synchronous(g, opts);
    case Schedule::round_robin: return run_round_robin(g, opts);
    case Schedule::rbp1l: return run_rbp1l(g, opts);
    case Schedule::rbp0l: return run_rbp0l(g, opts);
  }
  throw Error("unreachable");
}

Rbp0lInit warm_restart_priorities(const FactorGraph& old_g, const FactorGraph& new_g,
                                  const MessageState& converged_msgs) {
  if (old_g.num_variables() != new_g.num_variables() ||
      old_g.num_factors() != new_g.num_factors() || old_g.num_edges() != new_g.num_edges())
    throw StructureMismatch("graphs differ in size");
  for (std::int32_t i = 0; i < old_g.num_variables(); ++i)
    if (old_g.cardinality(i) != new_g.cardinality(i))
      throw StructureMismatch("cardinality of variable " + std::to_string(i) + " differs");
  for (std::int32_t a = 0; a < old_g.num_factors(); ++a)
    if (old_g.factor(a).scope != new_g.factor(a).scope)
      throw StructureMismatch("scope of factor " + std::to_string(a) + " differs");
  if (converged_msgs.num_edges() != old_g.num_edges())
    throw StructureMismatch("message state does not match the graphs");

  Rbp0lInit init{converged_msgs, std::vector<double>(new_g.num_edges(), 0.0)};
  for (EdgeId e = 0; e < new_g.num_edges(); ++e) {
    const Edge& ed = new_g.edge(e);
    if (ed.src.kind != NodeKind::factor) continue;
    const std::int32_t a = ed.src.index;
    // Worst log ratio between the normalized tables.
    const auto lt_old = old_g.log_table(a);
    const auto lt_new = new_g.log_table(a);
    const double shift = new_g.log_table_sum(a) - old_g.log_table_sum(a);
    double bound = 0.0;
    for (std::size_t k = 0; k < lt_old.size(); ++k)
      bound = std::max(bound, std::abs(lt_new[k] - lt_old[k] - shift));
    init.priorities[e] = bound;
  }
  return init;
}

}  // namespace loopybp
