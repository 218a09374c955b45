"""Derivative-free parameter search for shot-noisy cost functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from ..simulator import RngStream

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "nelder-mead"
    max_iterations: int = 200
    max_evaluations: int | None = None
    tolerance: float = 1e-4
    initial_step: float = 0.5
    init: str = "uniform"  # or "zeros"
    seed: int = 0
    restarts: int = 1  # independent starts; each gets the full budget

    def __post_init__(self):
        if self.method not in ("nelder-mead", "powell"):
            raise ValueError(f"unknown optimizer method {self.method!r}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        if self.init not in ("uniform", "zeros"):
            raise ValueError(f"unknown initial-point rule {self.init!r}")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class OptimizeResult:
    params: np.ndarray
    cost: float
    trace: list[float] = field(repr=False)
    iterations: int = 0
    evaluations: int = 0
    converged: bool = False


def initial_point(config: OptimizerConfig, dim: int, rng: RngStream | np.random.Generator | None = None) -> np.ndarray:
    if config.init == "zeros":
        return np.zeros(dim)
    if rng is None:
        rng = RngStream(config.seed)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return gen.uniform(0.0, TWO_PI, size=dim)


def _start_stream(rng, restart: int):
    if restart == 0 or not isinstance(rng, RngStream):
        return rng
    return rng.child(restart)


def optimize(
    cost: Callable[[np.ndarray], float],
    config: OptimizerConfig,
    rng: RngStream | np.random.Generator | None = None,
    dim: int | None = None,
    x0=None,
) -> OptimizeResult:
    """Minimize ``cost`` from the configured initial point(s).

    The trace holds every evaluated cost in order. The returned parameters
    are the best evaluated point, which for a noisy objective may differ from
    the final simplex vertex. Hitting the iteration or evaluation budget is
    not an error; ``converged`` is False then.

    With ``config.restarts > 1`` the search is repeated from fresh initial
    points (restart r draws from ``rng.child(r)``; restart 0 uses ``x0`` when
    given) and the best point over all of them is returned.
    """
    if x0 is None and dim is None:
        raise ValueError("need dim or x0")
    if rng is None:
        rng = RngStream(config.seed)
    trace: list[float] = []
    best = [np.inf, None]

    def wrapped(x):
        c = float(cost(x))
        trace.append(c)
        if c < best[0]:
            best[0], best[1] = c, np.array(x, dtype=float)
        return c

    iterations, converged = 0, False
    for r in range(config.restarts):
        if r == 0 and x0 is not None:
            start = np.asarray(x0, dtype=float)
        else:
            start = initial_point(config, dim if dim is not None else np.size(x0), _start_stream(rng, r))
        if best[1] is None:
            best[1] = start.copy()
        res = _minimize(wrapped, start, config)
        iterations += int(res.nit)
        converged = converged or bool(res.success)
    return OptimizeResult(
        params=best[1], cost=best[0], trace=trace, iterations=iterations,
        evaluations=len(trace), converged=converged,
    )


def _minimize(fun, x0: np.ndarray, config: OptimizerConfig):
    maxfev = config.max_evaluations or 10**9
    if config.method == "nelder-mead":
        simplex = np.vstack([x0, x0 + config.initial_step * np.eye(x0.size)])
        return minimize(
            fun, x0, method="Nelder-Mead",
            options=dict(maxiter=config.max_iterations, maxfev=maxfev, xatol=config.tolerance,
                         fatol=config.tolerance, initial_simplex=simplex, adaptive=x0.size > 4),
        )
    return minimize(
        fun, x0, method="Powell",
        options=dict(maxiter=config.max_iterations, maxfev=maxfev, xtol=config.tolerance, ftol=config.tolerance),
    )
