"""Scoring and reporting: utilization, Jain fairness, cross-solver summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import Instance, Solution, UNICAST, per_user_rewards, rb_usage
from .solvers import SolverReport

# Utilization bands reported alongside per-cell fractions: 0-20%, 21-40%,
# 41-60%, 61-80%, 81-100%.
UTILIZATION_BANDS = ((0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0))


def resource_utilization(
    instance: Instance, solution: Solution, mode: str = UNICAST
) -> np.ndarray:
    """Fraction of each cell's RB budget consumed by the solution."""
    return rb_usage(instance, solution, mode) / instance.rb_budget


def utilization_bands(fractions: np.ndarray) -> list[int]:
    """Cell counts per utilization band (upper edges inclusive)."""
    counts = []
    for lo, hi in UTILIZATION_BANDS:
        if lo == 0.0:
            counts.append(int(((fractions >= lo) & (fractions <= hi)).sum()))
        else:
            counts.append(int(((fractions > lo) & (fractions <= hi)).sum()))
    return counts


def jain_index(rewards) -> float | None:
    """Jain's fairness index (sum r)^2 / (n * sum r^2); None when all zero."""
    r = np.asarray(rewards, dtype=float)
    if (r < 0).any():
        raise ValueError("rewards must be nonnegative")
    denom = (r**2).sum()
    if denom == 0:
        return None
    return float(r.sum() ** 2 / (r.size * denom))


@dataclass
class SolverSummary:
    solver: str
    objective: float
    gap: float
    jain: float | None
    utilization: list[float]
    mean_utilization: float
    utilization_bands: list[int]
    wall_time: float


@dataclass
class RunSummary:
    """Cross-solver scorecard for one instance."""

    solvers: dict[str, SolverSummary] = field(default_factory=dict)
    reference: str = ""

    def row(self, solver: str) -> SolverSummary:
        return self.solvers[solver]


def summarize(
    instance: Instance,
    solutions: dict[str, tuple[Solution, SolverReport]],
    mode: str = UNICAST,
) -> RunSummary:
    """Aggregate objectives, utilizations, fairness, and gaps per solver.

    Gaps are relative to the branch-and-bound objective when present,
    otherwise to the best objective among the given solvers.
    """
    if not solutions:
        raise ValueError("no solutions to summarize")
    objectives = {name: rep.objective for name, (_, rep) in solutions.items()}
    if "bb" in solutions:
        reference = "bb"
    else:
        reference = max(objectives, key=lambda n: (objectives[n], n))
    ref_obj = objectives[reference]

    summary = RunSummary(reference=reference)
    for name, (sol, rep) in sorted(solutions.items()):
        util = resource_utilization(instance, sol, mode)
        rewards = per_user_rewards(instance, sol)
        gap = rep.objective / ref_obj if ref_obj > 0 else 1.0
        summary.solvers[name] = SolverSummary(
            solver=name,
            objective=rep.objective,
            gap=gap,
            jain=jain_index(rewards),
            utilization=[float(u) for u in util],
            mean_utilization=float(util.mean()),
            utilization_bands=utilization_bands(util),
            wall_time=rep.wall_time,
        )
    return summary
