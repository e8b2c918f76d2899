#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "loopybp/factor_graph.hpp"

namespace loopybp {

/// All stored messages of one inference run, in the log domain, one vector
/// per directed edge over the edge's variable states. Every stored message
/// is normalized (log-sum-exp == 0) and carries a monotone version counter.
class MessageState {
 public:
  explicit MessageState(const FactorGraph& g);

  EdgeId num_edges() const { return static_cast<EdgeId>(versions_.size()); }
  std::int32_t size(EdgeId e) const {
    return static_cast<std::int32_t>(offsets_[e + 1] - offsets_[e]);
  }
  std::span<const double> message(EdgeId e) const {
    return {data_.data() + offsets_[e], data_.data() + offsets_[e + 1]};
  }
  std::uint64_t version(EdgeId e) const { return versions_[e]; }

 private:
  std::span<double> mutable_message(EdgeId e) {
    return {data_.data() + offsets_[e], data_.data() + offsets_[e + 1]};
  }

  friend std::span<const double> apply_update(MessageState&, EdgeId, std::span<const double>,
                                              double);

  std::vector<double> data_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::uint64_t> versions_;
};

/// Uniform messages, version 0 everywhere.
MessageState init_uniform(const FactorGraph& g);

/// Evaluates the update for one directed edge from the current messages
/// without storing it (the compute side of the compute/perform split).
/// Factor->variable: log-sum-exp over the factor's joint states of the table
/// times the other incoming messages; variable->factor: sum of the other
/// incoming log messages. The result is normalized.
std::vector<double> compute_update(const FactorGraph& g, const MessageState& msgs, EdgeId e);

/// As above, additionally reporting the log normalizer of the raw update
/// evaluated with the factor table itself normalized to sum 1 (identity for
/// variable-source edges). The raw value of the update at state x is
/// result[x] + raw_log_scale; schedulers use this to reason about update
/// ratios independently of message normalization.
std::vector<double> compute_update(const FactorGraph& g, const MessageState& msgs, EdgeId e,
                                   double& raw_log_scale);

/// Log normalizer of the raw update of a never-performed edge, i.e. of the
/// update evaluated with uniform incoming messages and a uniform (normalized)
/// factor in place of the real table.
double initial_raw_log_scale(const FactorGraph& g, EdgeId e);

/// Stores a blend of the new and old message: (1-damping)*new + damping*old
/// in the linear domain, renormalized, computed stably in logs. Returns a
/// view of the stored message; bumps the edge version.
std::span<const double> apply_update(MessageState& msgs, EdgeId e,
                                     std::span<const double> new_msg, double damping);

// -- distances between normalized log messages ------------------------------

/// Worst-case absolute log ratio, max_x |log new(x) - log old(x)|.
double residual(std::span<const double> old_msg, std::span<const double> new_msg);

/// Spread of the log ratio across states, max ratio minus min ratio.
double dynamic_range(std::span<const double> old_msg, std::span<const double> new_msg);

/// KL divergence sum_x p(x) (log p(x) - log q(x)) of normalized log messages.
double message_kl(std::span<const double> p_msg, std::span<const double> q_msg);

struct ErrorMetrics {
  double residual = 0.0;
  double dynamic_range = 0.0;
  double kl = 0.0;
};

/// All three distances from `old_msg` to `new_msg` (KL takes the older
/// message as its first argument).
ErrorMetrics error_metrics(std::span<const double> old_msg, std::span<const double> new_msg);

// -- beliefs and energies ----------------------------------------------------

struct Belief {
  NodeRef target;
  std::vector<double> distribution;  // linear domain, sums to 1
};

Belief variable_belief(const FactorGraph& g, const MessageState& msgs, std::int32_t i);
Belief factor_belief(const FactorGraph& g, const MessageState& msgs, std::int32_t a);

/// Contribution of one node to the Bethe free energy: for a factor a,
/// sum_x b_a(x) log(b_a(x)/t_a(x)); for a variable i, (1 - degree_i) *
/// sum_x b_i(x) log b_i(x).
double bethe_term(const FactorGraph& g, const MessageState& msgs, NodeRef n);

/// Bethe approximation of log Z from the current (possibly locally
/// inconsistent) beliefs: minus the sum of all bethe_term values.
double bethe_log_z(const FactorGraph& g, const MessageState& msgs);

// -- residual bounds ---------------------------------------------------------

/// max_x |log(new_table(x) / old_table(x))| for same-shape positive tables.
double factor_change_bound(std::span<const double> old_table,
                           std::span<const double> new_table);

/// Residual bound of a node's outgoing updates from the uniform start: for a
/// factor, the worst absolute log ratio between its normalized table and the
/// normalized uniform table; 0 for variables.
double initial_priority(const FactorGraph& g, NodeRef n);

}  // namespace loopybp
