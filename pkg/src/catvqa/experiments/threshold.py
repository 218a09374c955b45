"""Aggregation of sweep records, noise-resiliency thresholds and model comparison."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

DEFAULT_EPSILON = 0.02
# a drop in mean cost with rising p larger than this many standard errors
# marks a curve as non-monotone
MONOTONE_SIGMAS = 3.0


@dataclass(frozen=True)
class CurvePoint:
    p: float
    mean: float
    se: float
    count: int


@dataclass(frozen=True)
class ThresholdReport:
    model: str
    n: int
    L: int
    baseline: float
    saturation: float
    p_star: float
    epsilon: float
    points: tuple[CurvePoint, ...] = field(repr=False)
    flags: tuple[str, ...] = ()

    @property
    def grid(self) -> tuple[float, ...]:
        return tuple(pt.p for pt in self.points)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["points"] = [asdict(pt) for pt in self.points]
        d["flags"] = list(self.flags)
        return d


def mean_and_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
    return float(v.mean()), se


def aggregate(records: Iterable[dict]) -> dict[tuple, CurvePoint]:
    """Mean and standard error of final_cost per (model, p, n, L)."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    for r in records:
        groups[(r["model"], float(r["p"]), int(r["n"]), int(r["L"]))].append(float(r["final_cost"]))
    out = {}
    for key in sorted(groups):
        mean, se = mean_and_se(groups[key])
        out[key] = CurvePoint(key[1], mean, se, len(groups[key]))
    return out


def extract_threshold(records: Iterable[dict], epsilon: float = DEFAULT_EPSILON) -> ThresholdReport:
    """Largest swept p up to which the mean cost stays within epsilon of the baseline.

    The baseline is the mean at the smallest swept p. The resilient regime is
    read from the bottom of the grid: p* is the last point before the first
    excursion above baseline + epsilon, so a noisy curve that dips back under
    the line at high p does not move p*; such curves are flagged instead.
    """
    records = list(records)
    keys = {(r["model"], int(r["n"]), int(r["L"])) for r in records}
    if len(keys) != 1:
        raise ValueError(f"records must cover exactly one (model, n, L), got {sorted(keys)}")
    model, n, L = keys.pop()
    points = tuple(aggregate(records).values())
    if len(points) < 3:
        raise ValueError(f"need at least 3 noise levels, got {len(points)}")
    return threshold_from_curve(model, n, L, points, epsilon)


def threshold_from_curve(model: str, n: int, L: int, points, epsilon: float = DEFAULT_EPSILON) -> ThresholdReport:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    points = tuple(sorted(points, key=lambda pt: pt.p))
    means = np.array([pt.mean for pt in points])
    baseline = float(means[0])
    inside = means <= baseline + epsilon
    k = len(points) - 1 if inside.all() else int(np.argmin(inside)) - 1
    flags = []
    if k == len(points) - 1:
        flags.append("above grid")
    if k == 0:
        flags.append("below grid")
    if inside[k + 1:].any() or _non_monotone(points):
        flags.append("ill-conditioned")
    return ThresholdReport(model, n, L, baseline, float(means[-1]), points[k].p, epsilon, points, tuple(flags))


def _non_monotone(points) -> bool:
    for a, b in zip(points, points[1:]):
        se = np.hypot(a.se, b.se)
        if not np.isfinite(se):
            continue
        if a.mean - b.mean > MONOTONE_SIGMAS * se + 1e-12:
            return True
    return False


def threshold_reports(records: Iterable[dict], epsilon: float = DEFAULT_EPSILON) -> list[ThresholdReport]:
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for r in records:
        groups[(r["model"], int(r["n"]), int(r["L"]))].append(r)
    return [extract_threshold(groups[k], epsilon) for k in sorted(groups)]


@dataclass(frozen=True)
class Comparison:
    a: str
    b: str
    relation: str  # ">", "<" or "overlap" (p* of a relative to b)
    steps: int  # grid steps from p*(b) to p*(a)

    def holds(self, relation: str) -> bool:
        """True when ``a relation b`` is consistent with the comparison.

        ``>=`` accepts ">" and an exact tie; "overlap" accepts anything
        within one grid step.
        """
        if relation == ">=":
            return self.steps >= 0
        if relation == "<=":
            return self.steps <= 0
        if relation == "overlap":
            return self.relation == "overlap"
        raise ValueError(f"unknown relation {relation!r}")


@dataclass(frozen=True)
class ComparisonSummary:
    ordering: tuple[str, ...]
    pairs: tuple[Comparison, ...]

    def pair(self, a: str, b: str) -> Comparison:
        for c in self.pairs:
            if (c.a, c.b) == (a, b):
                return c
            if (c.b, c.a) == (a, b):
                rel = {">": "<", "<": ">"}.get(c.relation, c.relation)
                return Comparison(a, b, rel, -c.steps)
        raise KeyError((a, b))


def compare_models(reports: Iterable[ThresholdReport]) -> ComparisonSummary:
    """Order models by p* and flag pairs whose thresholds lie within one grid step."""
    reports = list(reports)
    if len({(r.n, r.L) for r in reports}) > 1:
        raise ValueError("reports must share (n, L)")
    grid = sorted({pt.p for r in reports for pt in r.points})
    index = {p: i for i, p in enumerate(grid)}
    pairs = []
    for ra, rb in combinations(reports, 2):
        steps = index[ra.p_star] - index[rb.p_star]
        rel = "overlap" if abs(steps) <= 1 else (">" if steps > 0 else "<")
        pairs.append(Comparison(ra.model, rb.model, rel, steps))
    ordering = tuple(r.model for r in sorted(reports, key=lambda r: (-r.p_star, r.model)))
    return ComparisonSummary(ordering, tuple(pairs))
