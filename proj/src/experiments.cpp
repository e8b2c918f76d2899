#include "loopybp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "loopybp/exact.hpp"

namespace loopybp {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_time(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<BenchRow> run_instance(const BenchConfig& cfg, std::uint64_t seed) {
  const FactorGraph g = gen_potts_grid(cfg.n, cfg.c, seed);
  const ExactResult exact = eliminate_marginals(g);

  std::vector<BenchRow> rows;
  rows.reserve(cfg.schedules.size());
  for (Schedule s : cfg.schedules) {
    RunOptions opts;
    opts.tolerance = cfg.tolerance;
    opts.max_sweeps = cfg.max_sweeps;
    opts.damping = cfg.damping;
    opts.schedule = s;
    opts.seed = seed;
    opts.model_id = "potts-n" + std::to_string(cfg.n);
    auto [msgs, st] = run_schedule(g, opts);

    std::vector<Belief> beliefs;
    beliefs.reserve(g.num_variables());
    for (std::int32_t i = 0; i < g.num_variables(); ++i)
      beliefs.push_back(variable_belief(g, msgs, i));

    BenchRow row;
    row.seed = seed;
    row.n = cfg.n;
    row.c = cfg.c;
    row.schedule = st.schedule;
    row.converged = st.converged;
    row.messages_computed = st.messages_computed;
    row.messages_performed = st.messages_performed;
    row.wasted = st.wasted;
    row.sweeps_equivalent = st.sweeps_equivalent;
    row.final_max_residual = st.final_max_residual;
    row.avg_kl = avg_variable_kl(exact, beliefs);
    row.wall_time_s = st.wall_time_s;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<BenchRow> bench_schedules(const BenchConfig& cfg) {
  if (cfg.instances < 1) throw Error("bench needs at least one instance");
  std::vector<std::vector<BenchRow>> per_instance(cfg.instances);

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (std::int32_t k = 0; k < cfg.instances; ++k)
      per_instance[k] = run_instance(cfg, cfg.seed_base + k);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::int32_t> next{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::int32_t k = next.fetch_add(1);
          if (k >= cfg.instances) return;
          per_instance[k] = run_instance(cfg, cfg.seed_base + k);
        }
      });
    for (auto& th : pool) th.join();
  }

  std::vector<BenchRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.instances) * cfg.schedules.size());
  for (auto& r : per_instance)
    for (auto& row : r) rows.push_back(std::move(row));
  return rows;
}

BenchSummary summarize(const std::vector<BenchRow>& rows) {
  if (rows.empty()) throw EmptyInput("summarize: no bench rows");

  std::vector<std::string> names;
  for (const auto& r : rows)
    if (std::find(names.begin(), names.end(), r.schedule) == names.end())
      names.push_back(r.schedule);

  BenchSummary sum;
  for (const auto& name : names) {
    ScheduleSummary s;
    s.schedule = name;
    std::vector<double> computed, performed, wasted_frac, kls;
    for (const auto& r : rows) {
      if (r.schedule != name) continue;
      ++s.runs;
      if (!r.converged) continue;
      ++s.converged;
      computed.push_back(static_cast<double>(r.messages_computed));
      performed.push_back(static_cast<double>(r.messages_performed));
      if (r.messages_computed > 0)
        wasted_frac.push_back(static_cast<double>(r.wasted) /
                              static_cast<double>(r.messages_computed));
      kls.push_back(r.avg_kl);
    }
    s.convergence_rate = s.runs ? static_cast<double>(s.converged) / s.runs : 0.0;
    if (!computed.empty()) {
      s.mean_computed = mean(computed);
      s.median_computed = median(computed);
      s.mean_performed = mean(performed);
      s.median_performed = median(performed);
      s.mean_kl = mean(kls);
      if (name == "rbp1l") s.mean_wasted_fraction = mean(wasted_frac);
    }
    sum.schedules.push_back(std::move(s));
  }

  // Pairwise wins on jointly-converging instances.
  auto find_row = [&](std::uint64_t seed, const std::string& name) -> const BenchRow* {
    for (const auto& r : rows)
      if (r.seed == seed && r.schedule == name) return &r;
    return nullptr;
  };
  std::vector<std::uint64_t> seeds;
  for (const auto& r : rows)
    if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);

  for (const auto& a : names)
    for (const auto& b : names) {
      if (a == b) continue;
      PairwiseWins w;
      w.schedule_a = a;
      w.schedule_b = b;
      for (std::uint64_t seed : seeds) {
        const BenchRow* ra = find_row(seed, a);
        const BenchRow* rb = find_row(seed, b);
        if (!ra || !rb || !ra->converged || !rb->converged) continue;
        ++w.jointly_converging;
        if (ra->messages_computed < rb->messages_computed) ++w.a_wins;
      }
      sum.wins.push_back(w);
    }

  const bool have_pair = std::find(names.begin(), names.end(), "rbp0l") != names.end() &&
                         std::find(names.begin(), names.end(), "rbp1l") != names.end();
  if (have_pair) {
    std::vector<double> c0, c1, kld;
    for (std::uint64_t seed : seeds) {
      const BenchRow* r0 = find_row(seed, "rbp0l");
      const BenchRow* r1 = find_row(seed, "rbp1l");
      if (!r0 || !r1 || !r0->converged || !r1->converged) continue;
      c0.push_back(static_cast<double>(r0->messages_computed));
      c1.push_back(static_cast<double>(r1->messages_computed));
      kld.push_back(std::abs(r0->avg_kl - r1->avg_kl));
    }
    if (!c0.empty()) {
      sum.mean_computed_ratio_rbp0l_rbp1l = mean(c0) / mean(c1);
      sum.mean_abs_kl_diff_rbp0l_rbp1l = mean(kld);
    }
  }
  return sum;
}

std::string bench_csv_header() {
  return "seed,n,c,schedule,converged,messages_computed,messages_performed,wasted,"
         "sweeps_equivalent,final_max_residual,avg_kl,wall_time_s";
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << bench_csv_header() << "\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << r.n << ',' << fmt(r.c) << ',' << r.schedule << ','
        << (r.converged ? "true" : "false") << ',' << r.messages_computed << ','
        << r.messages_performed << ',' << r.wasted << ',' << fmt(r.sweeps_equivalent) << ','
        << fmt(r.final_max_residual) << ',' << fmt(r.avg_kl) << ',' << fmt_time(r.wall_time_s)
        << "\n";
  }
  return out.str();
}

std::string format_summary(const BenchSummary& s) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return std::string(buf);
  };
  out << "generator: " << potts_generator_name() << "\n";
  out << "schedule      runs conv  rate    mean_comp  med_comp   mean_perf  wasted_frac mean_kl\n";
  for (const auto& sch : s.schedules) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-13s %4d %4d  %-7.3g %-10s %-10s %-10s %-11s %s\n",
                  sch.schedule.c_str(), sch.runs, sch.converged, sch.convergence_rate,
                  opt(sch.mean_computed).c_str(), opt(sch.median_computed).c_str(),
                  opt(sch.mean_performed).c_str(), opt(sch.mean_wasted_fraction).c_str(),
                  opt(sch.mean_kl).c_str());
    out << line;
  }
  out << "pairwise wins (fewer computed messages, jointly-converging instances):\n";
  for (const auto& w : s.wins) {
    char line[160];
    std::snprintf(line, sizeof(line), "  %s < %s: %d of %d\n", w.schedule_a.c_str(),
                  w.schedule_b.c_str(), w.a_wins, w.jointly_converging);
    out << line;
  }
  if (s.mean_computed_ratio_rbp0l_rbp1l)
    out << "mean computed ratio rbp0l/rbp1l: " << opt(s.mean_computed_ratio_rbp0l_rbp1l) << "\n";
  if (s.mean_abs_kl_diff_rbp0l_rbp1l)
    out << "mean |avg_kl(rbp0l) - avg_kl(rbp1l)|: " << opt(s.mean_abs_kl_diff_rbp0l_rbp1l)
        << "\n";
  return out.str();
}

std::vector<TraceRecord> trace_metrics(const FactorGraph& g, const RunOptions& opts) {
  RunOptions ropts = opts;
  ropts.schedule = Schedule::rbp0l;

  auto [converged_msgs, first_stats] = run_rbp0l(g, ropts);
  if (!first_stats.converged)
    throw DidNotConverge("rbp0l hit the sweep cutoff; no converged reference available");

  // Bethe contribution of every node, kept incrementally: a performed update
  // only moves the belief of its destination node.
  std::vector<double> var_term(g.num_variables());
  std::vector<double> fac_term(g.num_factors());
  {
    const MessageState uniform(g);
    for (std::int32_t i = 0; i < g.num_variables(); ++i)
      var_term[i] = bethe_term(g, uniform, NodeRef::var(i));
    for (std::int32_t a = 0; a < g.num_factors(); ++a)
      fac_term[a] = bethe_term(g, uniform, NodeRef::fac(a));
  }

  std::vector<TraceRecord> records;
  const auto observer = [&](std::uint64_t step, EdgeId e, std::span<const double> old_msg,
                            std::span<const double> stored, const MessageState& msgs) {
    const auto ref = converged_msgs.message(e);
    TraceRecord rec;
    rec.step = step;
    rec.edge = e;
    const ErrorMetrics ms = error_metrics(old_msg, stored);
    rec.r_step = ms.residual;
    rec.d_step = ms.dynamic_range;
    rec.kl_step = ms.kl;
    const ErrorMetrics prev = error_metrics(old_msg, ref);
    rec.r_prev_conv = prev.residual;
    rec.d_prev_conv = prev.dynamic_range;
    rec.kl_prev_conv = prev.kl;
    const ErrorMetrics now = error_metrics(stored, ref);
    rec.r_new_conv = now.residual;
    rec.d_new_conv = now.dynamic_range;
    rec.kl_new_conv = now.kl;

    const NodeRef target = g.edge(e).dst;
    const double fresh_term = bethe_term(g, msgs, target);
    double& slot = target.kind == NodeKind::variable ? var_term[target.index]
                                                     : fac_term[target.index];
    rec.bethe_delta = -(fresh_term - slot);
    slot = fresh_term;

    rec.delta_dist = rec.r_new_conv - rec.r_prev_conv;
    records.push_back(rec);
  };

  auto [replay_msgs, replay_stats] = run_rbp0l(g, ropts, nullptr, observer);
  if (!replay_stats.converged) throw DidNotConverge("trace rerun diverged");
  return records;
}

std::string trace_csv_header() {
  return "step,edge,r_step,d_step,kl_step,r_prev_conv,r_new_conv,d_prev_conv,d_new_conv,"
         "kl_prev_conv,kl_new_conv,bethe_delta,delta_dist";
}

std::string to_csv(const std::vector<TraceRecord>& rows) {
  std::ostringstream out;
  out << trace_csv_header() << "\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.edge << ',' << fmt(r.r_step) << ',' << fmt(r.d_step) << ','
        << fmt(r.kl_step) << ',' << fmt(r.r_prev_conv) << ',' << fmt(r.r_new_conv) << ','
        << fmt(r.d_prev_conv) << ',' << fmt(r.d_new_conv) << ',' << fmt(r.kl_prev_conv) << ','
        << fmt(r.kl_new_conv) << ',' << fmt(r.bethe_delta) << ',' << fmt(r.delta_dist) << "\n";
  }
  return out.str();
}

}  // namespace loopybp
