"""Iterative proportional fitting against component marginals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import broadcast_to_space, sum_to
from .system import ProbabilitySystem

# a sweep counts as stalled when the residual drops by less than this over STALL_WINDOW sweeps
STALL_DECREASE = 1e-14
STALL_WINDOW = 100

CONVERGED = "converged"
STALLED = "stalled"
MAX_ITER = "max_iter"


@dataclass
class IPFRun:
    joint: np.ndarray
    iterations: int
    residual: float
    status: str


def marginal_residual(joint: np.ndarray, system: ProbabilitySystem) -> float:
    """Largest absolute gap between a joint's component marginals and the system tables."""
    names = system.space.names
    worst = 0.0
    for comp, table in zip(system.structure.components, system.tables):
        worst = max(worst, float(np.max(np.abs(sum_to(joint, names, comp) - table.values))))
    return worst


def ipf_sweep(joint: np.ndarray, system: ProbabilitySystem) -> np.ndarray:
    """One cycle of rescaling, components in structure order."""
    space = system.space
    names = space.names
    out = np.array(joint, dtype=np.float64)
    for comp, table in zip(system.structure.components, system.tables):
        current = sum_to(out, names, comp)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(current > 0, table.values / np.where(current > 0, current, 1.0), 0.0)
        out *= broadcast_to_space(ratio, comp, space)
    return out


def ipf(
    system: ProbabilitySystem,
    start: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 10000,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> IPFRun:
    """Fit `start` (uniform by default) to every component table.

    Stops with status ``converged`` once the marginal residual is below
    `tol`, ``stalled`` when it has stopped decreasing while above `tol`,
    or ``max_iter``.
    """
    space = system.space
    joint = np.full(space.shape, 1.0 / space.size) if start is None else np.array(start, dtype=np.float64).reshape(space.shape)
    history: list[float] = []
    residual = marginal_residual(joint, system)
    if residual < tol:
        return IPFRun(joint, 0, residual, CONVERGED)
    for it in range(1, max_iter + 1):
        joint = ipf_sweep(joint, system)
        total = joint.sum()
        if total > 0:
            joint /= total
        if callback is not None:
            callback(it, joint)
        residual = marginal_residual(joint, system)
        if residual < tol:
            return IPFRun(joint, it, residual, CONVERGED)
        history.append(residual)
        if len(history) > STALL_WINDOW and history[-STALL_WINDOW - 1] - residual < STALL_DECREASE:
            return IPFRun(joint, it, residual, STALLED)
    return IPFRun(joint, max_iter, residual, MAX_ITER)
