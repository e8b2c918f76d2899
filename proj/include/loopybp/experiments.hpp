#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopybp/factor_graph.hpp"
#include "loopybp/schedulers.hpp"

namespace loopybp {

/// Grid benchmark configuration: one Potts grid per seed in
/// [seed_base, seed_base + instances), each run under every requested
/// schedule and scored against exact marginals.
struct BenchConfig {
  std::int32_t n = 10;
  double c = 5.0;
  std::int32_t instances = 20;
  std::uint64_t seed_base = 0;
  std::vector<Schedule> schedules = {Schedule::synchronous, Schedule::round_robin,
                                     Schedule::rbp1l, Schedule::rbp0l};
  double tolerance = 1e-3;
  int max_sweeps = 1000;
  double damping = 0.0;
  int jobs = 1;
};

struct BenchRow {
  std::uint64_t seed = 0;
  std::int32_t n = 0;
  double c = 0.0;
  std::string schedule;
  bool converged = false;
  std::uint64_t messages_computed = 0;
  std::uint64_t messages_performed = 0;
  std::uint64_t wasted = 0;
  double sweeps_equivalent = 0.0;
  double final_max_residual = 0.0;
  double avg_kl = 0.0;
  double wall_time_s = 0.0;
};

/// One instance x schedule row per run, ordered by (seed, schedule position).
/// Deterministic apart from wall_time_s; jobs > 1 parallelizes across
/// instances without changing the output order.
std::vector<BenchRow> bench_schedules(const BenchConfig& cfg);

struct ScheduleSummary {
  std::string schedule;
  std::int32_t runs = 0;
  std::int32_t converged = 0;
  double convergence_rate = 0.0;
  // Over converging runs of this schedule; absent when none converge.
  std::optional<double> mean_computed;
  std::optional<double> median_computed;
  std::optional<double> mean_performed;
  std::optional<double> median_performed;
  std::optional<double> mean_wasted_fraction;
  std::optional<double> mean_kl;
};

struct PairwiseWins {
  std::string schedule_a;
  std::string schedule_b;
  std::int32_t jointly_converging = 0;
  std::int32_t a_wins = 0;  // instances where a computed strictly fewer messages
};

struct BenchSummary {
  std::vector<ScheduleSummary> schedules;
  std::vector<PairwiseWins> wins;  // every ordered pair of requested schedules
  // rbp0l vs rbp1l over jointly-converging instances, when both appear.
  std::optional<double> mean_computed_ratio_rbp0l_rbp1l;
  std::optional<double> mean_abs_kl_diff_rbp0l_rbp1l;
};

/// Aggregates bench rows; throws EmptyInput on an empty row set.
BenchSummary summarize(const std::vector<BenchRow>& rows);

std::string bench_csv_header();
std::string to_csv(const std::vector<BenchRow>& rows);
std::string format_summary(const BenchSummary& s);

/// Everything measured around one performed update of the trace rerun.
struct TraceRecord {
  std::uint64_t step = 0;
  EdgeId edge = 0;
  double r_step = 0.0, d_step = 0.0, kl_step = 0.0;
  double r_prev_conv = 0.0, r_new_conv = 0.0;
  double d_prev_conv = 0.0, d_new_conv = 0.0;
  double kl_prev_conv = 0.0, kl_new_conv = 0.0;
  double bethe_delta = 0.0;
  double delta_dist = 0.0;
};

/// Runs rbp0l twice: the first pass yields the converged messages, the second
/// replays the identical schedule and measures every performed update against
/// them. Throws DidNotConverge if the first pass hits the sweep cutoff.
std::vector<TraceRecord> trace_metrics(const FactorGraph& g, const RunOptions& opts);

std::string trace_csv_header();
std::string to_csv(const std::vector<TraceRecord>& rows);

}  // namespace loopybp
