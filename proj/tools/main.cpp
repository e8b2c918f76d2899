// Command line front end: generate grid models, run one schedule, benchmark
// schedules against exact marginals, trace per-update error metrics, and run
// exact inference.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "loopybp/exact.hpp"
#include "loopybp/experiments.hpp"
#include "loopybp/model_io.hpp"
#include "loopybp/schedulers.hpp"

namespace {

using namespace loopybp;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDidNotConverge = 3;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string beliefs_csv(const FactorGraph& g, const MessageState& msgs) {
  std::ostringstream out;
  out << "variable_id,state,probability\n";
  for (std::int32_t i = 0; i < g.num_variables(); ++i) {
    const Belief b = variable_belief(g, msgs, i);
    for (std::size_t x = 0; x < b.distribution.size(); ++x)
      out << i << ',' << x << ',' << fmt(b.distribution[x]) << "\n";
  }
  return out.str();
}

std::string marginals_csv(const ExactResult& res) {
  std::ostringstream out;
  out << "variable_id,state,probability\n";
  for (std::size_t i = 0; i < res.marginals.size(); ++i)
    for (std::size_t x = 0; x < res.marginals[i].size(); ++x)
      out << i << ',' << x << ',' << fmt(res.marginals[i][x]) << "\n";
  return out.str();
}

void print_stats(const RunStats& st) {
  std::cout << "model=" << st.model_id << "\n";
  std::cout << "seed=" << st.seed << "\n";
  std::cout << "schedule=" << st.schedule << "\n";
  std::cout << "converged=" << (st.converged ? "true" : "false") << "\n";
  std::cout << "messages_computed=" << st.messages_computed << "\n";
  std::cout << "messages_performed=" << st.messages_performed << "\n";
  std::cout << "wasted=" << st.wasted << "\n";
  std::cout << "sweeps_equivalent=" << fmt(st.sweeps_equivalent) << "\n";
  std::cout << "final_max_residual=" << fmt(st.final_max_residual) << "\n";
  std::cout << "wall_time_s=" << fmt(st.wall_time_s) << "\n";
}

const std::vector<std::string> kScheduleNames = {"synchronous", "round_robin", "rbp1l", "rbp0l"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete factor-graph belief propagation with dynamic message schedules"};
  app.require_subcommand(1);

  // gen-grid
  auto* gen = app.add_subcommand("gen-grid", "generate a random Potts grid model file");
  std::int32_t gen_n = 10;
  double gen_c = 5.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "grid side length")->capture_default_str();
  gen->add_option("--c", gen_c, "coupling bound, draws are uniform in [-c, c]")
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output model file")->required();

  // run
  auto* run = app.add_subcommand("run", "run one schedule on a model file");
  std::string run_model, run_schedule_arg, run_beliefs;
  double run_tol = 1e-3, run_damping = 0.0;
  int run_max_sweeps = 1000;
  run->add_option("--model", run_model, "model file")->required();
  run->add_option("--schedule", run_schedule_arg, "one of synchronous|round_robin|rbp1l|rbp0l")
      ->required()
      ->check(CLI::IsMember(kScheduleNames));
  run->add_option("--tol", run_tol, "convergence tolerance on the residual")
      ->capture_default_str();
  run->add_option("--max-sweeps", run_max_sweeps, "divergence cutoff in sweeps")
      ->capture_default_str();
  run->add_option("--damping", run_damping, "damping factor in [0,1)")->capture_default_str();
  run->add_option("--beliefs", run_beliefs, "write variable beliefs to this CSV file");

  // bench
  auto* bench = app.add_subcommand("bench", "benchmark schedules on random grids");
  BenchConfig cfg;
  std::string bench_schedules_arg = "synchronous,round_robin,rbp1l,rbp0l";
  std::string bench_csv;
  bench->add_option("--n", cfg.n, "grid side length")->capture_default_str();
  bench->add_option("--c", cfg.c, "coupling bound")->capture_default_str();
  bench->add_option("--instances", cfg.instances, "number of sampled grids")
      ->capture_default_str();
  bench->add_option("--seed-base", cfg.seed_base, "seed of the first instance")
      ->capture_default_str();
  bench->add_option("--schedules", bench_schedules_arg, "comma-separated schedule list")
      ->capture_default_str();
  bench->add_option("--tol", cfg.tolerance, "convergence tolerance")->capture_default_str();
  bench->add_option("--max-sweeps", cfg.max_sweeps, "divergence cutoff in sweeps")
      ->capture_default_str();
  bench->add_option("--damping", cfg.damping, "damping factor in [0,1)")->capture_default_str();
  bench->add_option("--jobs", cfg.jobs, "instances run in parallel")->capture_default_str();
  bench->add_option("--csv", bench_csv, "output CSV file")->required();

  // trace
  auto* trace = app.add_subcommand("trace", "per-update error metrics against the fixed point");
  std::string trace_model, trace_csv;
  double trace_tol = 1e-3, trace_damping = 0.0;
  int trace_max_sweeps = 1000;
  trace->add_option("--model", trace_model, "model file")->required();
  trace->add_option("--csv", trace_csv, "output CSV file")->required();
  trace->add_option("--tol", trace_tol, "convergence tolerance")->capture_default_str();
  trace->add_option("--max-sweeps", trace_max_sweeps, "divergence cutoff in sweeps")
      ->capture_default_str();
  trace->add_option("--damping", trace_damping, "damping factor in [0,1)")
      ->capture_default_str();

  // exact
  auto* exact = app.add_subcommand("exact", "exact marginals by variable elimination");
  std::string exact_model, exact_csv;
  exact->add_option("--model", exact_model, "model file")->required();
  exact->add_option("--csv", exact_csv, "output CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return kExitUsage;
  }

  try {
    if (*gen) {
      const FactorGraph g = gen_potts_grid(gen_n, gen_c, gen_seed);
      std::ostringstream out;
      out << "# potts grid: n=" << gen_n << " c=" << fmt(gen_c) << " seed=" << gen_seed
          << " generator=" << potts_generator_name() << "\n";
      out << save_model(g);
      write_file(gen_out, out.str());
    } else if (*run) {
      const FactorGraph g = load_model_file(run_model);
      RunOptions opts;
      opts.tolerance = run_tol;
      opts.max_sweeps = run_max_sweeps;
      opts.damping = run_damping;
      opts.schedule = schedule_from_name(run_schedule_arg);
      opts.model_id = run_model;
      auto [msgs, st] = run_schedule(g, opts);
      print_stats(st);
      if (!run_beliefs.empty()) write_file(run_beliefs, beliefs_csv(g, msgs));
    } else if (*bench) {
      cfg.schedules.clear();
      std::istringstream ss(bench_schedules_arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) cfg.schedules.push_back(schedule_from_name(tok));
      }
      if (cfg.schedules.empty()) {
        std::cerr << "bench: --schedules must name at least one schedule\n";
        return kExitUsage;
      }
      const auto rows = bench_schedules(cfg);
      write_file(bench_csv, to_csv(rows));
      std::cout << format_summary(summarize(rows)) << std::flush;
    } else if (*trace) {
      const FactorGraph g = load_model_file(trace_model);
      RunOptions opts;
      opts.tolerance = trace_tol;
      opts.max_sweeps = trace_max_sweeps;
      opts.damping = trace_damping;
      opts.model_id = trace_model;
      const auto rows = trace_metrics(g, opts);
      write_file(trace_csv, to_csv(rows));
      std::cout << "records=" << rows.size() << "\n";
    } else if (*exact) {
      const FactorGraph g = load_model_file(exact_model);
      const ExactResult res = eliminate_marginals(g);
      write_file(exact_csv, marginals_csv(res));
      std::cout << "log_z=" << fmt(res.log_z) << "\n";
    }
  } catch (const DidNotConverge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDidNotConverge;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
