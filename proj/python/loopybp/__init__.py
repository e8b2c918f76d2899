"""Discrete factor-graph belief propagation with dynamic message schedules."""

from loopybp._core import (
    ExactResult,
    FactorGraph,
    LoopybpError,
    MessageState,
    RunStats,
    avg_variable_kl,
    bethe_log_z,
    build_graph,
    dynamic_range,
    eliminate_marginals,
    enumerate_marginals,
    gen_potts_grid,
    load_model,
    message_kl,
    residual,
    run,
    save_model,
    variable_beliefs,
)

__all__ = [
    "ExactResult",
    "FactorGraph",
    "LoopybpError",
    "MessageState",
    "RunStats",
    "avg_variable_kl",
    "bethe_log_z",
    "build_graph",
    "dynamic_range",
    "eliminate_marginals",
    "enumerate_marginals",
    "gen_potts_grid",
    "load_model",
    "message_kl",
    "residual",
    "run",
    "save_model",
    "variable_beliefs",
]

__version__ = "0.1.0"
