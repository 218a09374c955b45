"""Noisy circuit simulation: trajectories, exact density evolution, estimation."""
from .density import DensityEngine, density_oracle, outcome_probabilities
from .estimate import Estimate, expectation, observable_values, resolve_backend, sample_counts
from .plan import Plan, PlanTemplate, build_plan, compile_circuit
from .trajectory import RngStream, ShotResult, StateVector, apply_gate, run_shot, sample_shots

__all__ = [
    "DensityEngine",
    "Estimate",
    "Plan",
    "PlanTemplate",
    "RngStream",
    "ShotResult",
    "StateVector",
    "apply_gate",
    "build_plan",
    "compile_circuit",
    "density_oracle",
    "expectation",
    "observable_values",
    "outcome_probabilities",
    "resolve_backend",
    "run_shot",
    "sample_counts",
    "sample_shots",
]
