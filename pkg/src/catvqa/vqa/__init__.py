"""Variational problems (QAOA-MaxCut, VQLS) and their optimization loop."""
from .objective import Objective, shot_cost
from .optimize import OptimizeResult, OptimizerConfig, initial_point, optimize
from .qaoa import (
    Graph,
    QaoaObjective,
    QaoaParams,
    build_qaoa_circuit,
    maxcut_cost_classical,
    maxcut_cost_table,
    qaoa_cost,
)
from .vqls import VqlsObjective, VqlsProblem, build_vqls_circuit, swap_test_cost, vqls_cost

__all__ = [
    "Graph", "QaoaParams", "QaoaObjective", "build_qaoa_circuit", "maxcut_cost_classical",
    "maxcut_cost_table", "qaoa_cost", "VqlsProblem", "VqlsObjective", "build_vqls_circuit",
    "swap_test_cost", "vqls_cost", "Objective", "shot_cost", "OptimizerConfig", "OptimizeResult",
    "initial_point", "optimize",
]
