#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "loopybp/exact.hpp"
#include "loopybp/experiments.hpp"
#include "loopybp/model_io.hpp"
#include "loopybp/schedulers.hpp"

namespace py = pybind11;
using namespace loopybp;

namespace {

FactorGraph build_graph_py(const std::vector<std::int32_t>& cardinalities,
                           const std::vector<std::pair<std::vector<std::int32_t>,
                                                       std::vector<double>>>& factors) {
  std::vector<VariableSpec> vars(cardinalities.size());
  for (std::size_t i = 0; i < cardinalities.size(); ++i)
    vars[i] = {static_cast<std::int32_t>(i), cardinalities[i]};
  std::vector<Factor> facs(factors.size());
  for (std::size_t a = 0; a < factors.size(); ++a)
    facs[a] = {static_cast<std::int32_t>(a), factors[a].first, factors[a].second};
  return build_graph(std::move(vars), std::move(facs));
}

std::vector<std::vector<double>> all_beliefs(const FactorGraph& g, const MessageState& msgs) {
  std::vector<std::vector<double>> out;
  out.reserve(g.num_variables());
  for (std::int32_t i = 0; i < g.num_variables(); ++i)
    out.push_back(variable_belief(g, msgs, i).distribution);
  return out;
}

std::vector<Belief> beliefs_from_lists(const std::vector<std::vector<double>>& dists) {
  std::vector<Belief> out(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i)
    out[i] = {NodeRef::var(static_cast<std::int32_t>(i)), dists[i]};
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "discrete factor-graph belief propagation with dynamic message schedules";

  py::register_exception<Error>(m, "LoopybpError", PyExc_ValueError);

  py::class_<FactorGraph>(m, "FactorGraph")
      .def_property_readonly("num_variables", &FactorGraph::num_variables)
      .def_property_readonly("num_factors", &FactorGraph::num_factors)
      .def_property_readonly("num_edges", &FactorGraph::num_edges)
      .def("cardinality", &FactorGraph::cardinality, py::arg("variable"))
      .def("__repr__", [](const FactorGraph& g) {
        return "FactorGraph(variables=" + std::to_string(g.num_variables()) +
               ", factors=" + std::to_string(g.num_factors()) +
               ", edges=" + std::to_string(g.num_edges()) + ")";
      });

  py::class_<MessageState>(m, "MessageState")
      .def("message", [](const MessageState& s, EdgeId e) {
        const auto v = s.message(e);
        return std::vector<double>(v.begin(), v.end());
      }, py::arg("edge"), "normalized log-domain message of one directed edge")
      .def("version", &MessageState::version, py::arg("edge"));

  py::class_<RunStats>(m, "RunStats")
      .def_readonly("schedule", &RunStats::schedule)
      .def_readonly("converged", &RunStats::converged)
      .def_readonly("messages_computed", &RunStats::messages_computed)
      .def_readonly("messages_performed", &RunStats::messages_performed)
      .def_readonly("wasted", &RunStats::wasted)
      .def_readonly("final_max_residual", &RunStats::final_max_residual)
      .def_readonly("sweeps_equivalent", &RunStats::sweeps_equivalent)
      .def_readonly("wall_time_s", &RunStats::wall_time_s)
      .def("__repr__", [](const RunStats& s) {
        return "RunStats(schedule='" + s.schedule +
               "', converged=" + (s.converged ? "True" : "False") +
               ", messages_computed=" + std::to_string(s.messages_computed) + ")";
      });

  py::class_<ExactResult>(m, "ExactResult")
      .def_readonly("log_z", &ExactResult::log_z)
      .def_readonly("marginals", &ExactResult::marginals);

  m.def("build_graph", &build_graph_py, py::arg("cardinalities"), py::arg("factors"),
        "Build a graph from per-variable cardinalities and (scope, flat table) pairs; "
        "tables are row-major with the last scope variable fastest.");
  m.def("gen_potts_grid", &gen_potts_grid, py::arg("n"), py::arg("c"), py::arg("seed"));
  m.def("save_model", &save_model, py::arg("graph"));
  m.def("load_model", &load_model, py::arg("text"));

  m.def(
      "run",
      [](const FactorGraph& g, const std::string& schedule, double tol, int max_sweeps,
         double damping) {
        RunOptions opts;
        opts.schedule = schedule_from_name(schedule);
        opts.tolerance = tol;
        opts.max_sweeps = max_sweeps;
        opts.damping = damping;
        auto [msgs, stats] = run_schedule(g, opts);
        return py::make_tuple(std::move(stats), std::move(msgs));
      },
      py::arg("graph"), py::arg("schedule") = "rbp0l", py::arg("tol") = 1e-3,
      py::arg("max_sweeps") = 1000, py::arg("damping") = 0.0,
      "Run one schedule; returns (RunStats, MessageState).");

  m.def("variable_beliefs", &all_beliefs, py::arg("graph"), py::arg("messages"),
        "Per-variable belief distributions from the current messages.");
  m.def(
      "bethe_log_z",
      [](const FactorGraph& g, const MessageState& msgs) { return bethe_log_z(g, msgs); },
      py::arg("graph"), py::arg("messages"));

  m.def("enumerate_marginals", &enumerate_marginals, py::arg("graph"));
  m.def("eliminate_marginals",
        py::overload_cast<const FactorGraph&>(&eliminate_marginals), py::arg("graph"));
  m.def("eliminate_marginals",
        py::overload_cast<const FactorGraph&, const std::vector<std::int32_t>&>(
            &eliminate_marginals),
        py::arg("graph"), py::arg("order"));
  m.def(
      "avg_variable_kl",
      [](const ExactResult& exact, const std::vector<std::vector<double>>& beliefs) {
        return avg_variable_kl(exact, beliefs_from_lists(beliefs));
      },
      py::arg("exact"), py::arg("beliefs"),
      "Mean over variables of KL(exact marginal || belief).");

  m.def(
      "residual",
      [](const std::vector<double>& a, const std::vector<double>& b) { return residual(a, b); },
      py::arg("old_log_msg"), py::arg("new_log_msg"));
  m.def(
      "dynamic_range",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return dynamic_range(a, b);
      },
      py::arg("old_log_msg"), py::arg("new_log_msg"));
  m.def(
      "message_kl",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return message_kl(a, b);
      },
      py::arg("p_log_msg"), py::arg("q_log_msg"));
}
