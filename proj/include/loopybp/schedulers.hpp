#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "loopybp/factor_graph.hpp"
#include "loopybp/propagation.hpp"

namespace loopybp {

enum class Schedule { synchronous, round_robin, rbp1l, rbp0l };

std::string schedule_name(Schedule s);
Schedule schedule_from_name(const std::string& name);  // throws Error on unknown names

struct RunOptions {
  double tolerance = 1e-3;
  int max_sweeps = 1000;
  double damping = 0.0;  // in [0, 1)
  Schedule schedule = Schedule::rbp0l;

  /// Verify on every rbp0l pop (damping 0 only) that the raw update ratio is
  /// within the queue priority; results land in RunStats.bound_*.
  bool check_priority_bound = false;

  // Provenance stamped into RunStats.
  std::uint64_t seed = 0;
  std::string model_id;
};

struct RunStats {
  std::string schedule;
  bool converged = false;
  std::uint64_t messages_computed = 0;
  std::uint64_t messages_performed = 0;
  std::uint64_t wasted = 0;           // rbp1l: computed updates replaced unperformed
  std::uint64_t pending_at_exit = 0;  // rbp1l: computed updates still queued at exit
  double wall_time_s = 0.0;
  double final_max_residual = 0.0;
  double sweeps_equivalent = 0.0;  // messages_computed / directed edge count
  std::uint64_t seed = 0;
  std::string model_id;

  // Populated when RunOptions::check_priority_bound is set.
  std::uint64_t bound_checks = 0;
  std::uint64_t bound_violations = 0;
  double max_bound_excess = 0.0;
};

/// Called after every performed update; `old_msg` is the stored message the
/// update replaced, `stored` the message now in place.
using PerformObserver =
    std::function<void(std::uint64_t step, EdgeId e, std::span<const double> old_msg,
                       std::span<const double> stored, const MessageState& msgs)>;

/// Starting configuration for run_rbp0l: messages to resume from plus one
/// initial queue priority per directed edge.
struct Rbp0lInit {
  MessageState messages;
  std::vector<double> priorities;
};

std::pair<MessageState, RunStats> run_synchronous(const FactorGraph& g, const RunOptions& opts);
std::pair<MessageState, RunStats> run_round_robin(const FactorGraph& g, const RunOptions& opts);

/// Residual scheduling with one-step lookahead: every pending update is
/// computed up front to learn its priority (the residual against the stored
/// message) and performed only when it reaches the top of the queue.
std::pair<MessageState, RunStats> run_rbp1l(const FactorGraph& g, const RunOptions& opts);

/// Residual scheduling with estimated priorities: nothing is computed ahead
/// of time; each edge's priority is the accumulated residual of its incoming
/// performed updates since the edge itself last fired, which upper-bounds the
/// pending update's raw ratio. Initial priorities come from each source
/// node's table-vs-uniform bound.
std::pair<MessageState, RunStats> run_rbp0l(const FactorGraph& g, const RunOptions& opts,
                                            const Rbp0lInit* init = nullptr,
                                            const PerformObserver& observer = nullptr);

/// Dispatch by opts.schedule.
std::pair<MessageState, RunStats> run_schedule(const FactorGraph& g, const RunOptions& opts);

/// Starting configuration for re-running inference after factor tables
/// changed: converged messages are carried over and each factor-source edge
/// is enqueued with the worst log ratio between the old and new normalized
/// tables (variable-source edges start at 0).
Rbp0lInit warm_restart_priorities(const FactorGraph& old_g, const FactorGraph& new_g,
                                  const MessageState& converged_msgs);

}  // namespace loopybp
