"""Product extension, the intersection-overlap model, and consistency checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ipf as _ipf
from .model import JointDistribution, broadcast_to_space, condition, sum_to
from .system import ProbabilitySystem
from .web import Structure, Unpacking, intersection_overlaps, is_web, pairwise_intersections, unpack

STANDARD = "standard"
ALTERNATIVE = "alternative"

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
UNDETERMINED = "undetermined"


class AllZeroWeight(ArithmeticError):
    """Every joint state got zero weight, so the model cannot be normalized."""


@dataclass(frozen=True, eq=False)
class ExpansionResult:
    joint: JointDistribution
    model: str
    k: float
    unpacking_used: Unpacking | None
    # raw weight total 1/k, kept so k can be reported without rounding
    weight_total: float = 1.0

    @property
    def ln_k(self) -> float:
        return -float(np.log(self.weight_total))


@dataclass(frozen=True, eq=False)
class ConsistencyVerdict:
    status: str
    residual: float
    witness: JointDistribution | None = None
    iterations: int = 0

    @property
    def consistent(self) -> bool:
        return self.status == CONSISTENT


@dataclass
class ConditionalReport:
    """Per-step largest deviation between a joint's conditionals and the system's."""

    deviations: list[tuple[tuple[str, ...], float]] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((d for _, d in self.deviations), default=0.0)


def _own_marginal(system: ProbabilitySystem, component, names) -> np.ndarray:
    """Marginal on `names` from `component`'s own table, broadcast over the joint space."""
    table = system.table(component)
    return broadcast_to_space(sum_to(table.values, table.names, names), names, system.space)


def product_extension(system: ProbabilitySystem, unpacking: Unpacking | None = None) -> ExpansionResult:
    """Joint given by the product of every step's P(tail | overlap)."""
    if unpacking is None:
        unpacking = unpack(system.structure)
    space = system.space
    joint = np.ones(space.shape)
    for step in unpacking.steps:
        table = system.table(step.component)
        cond = condition(table, step.ordered(step.overlap))
        joint = joint * broadcast_to_space(cond.values, table.names, space)
    return ExpansionResult(JointDistribution(space, joint), STANDARD, 1.0, unpacking)


def _alt_weights(system: ProbabilitySystem, factors) -> np.ndarray:
    space = system.space
    w = np.ones(space.shape)
    for component, ostars in factors:
        table = system.table(component)
        num = broadcast_to_space(table.values, table.names, space)
        den = np.ones(space.shape)
        for s in ostars:
            names = tuple(v for v in component if v in s)
            den = den * _own_marginal(system, component, names)
        with np.errstate(divide="ignore", invalid="ignore"):
            # zero marginal implies a zero numerator on the same states
            ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        w = w * ratio
    return w


def alternative_model(
    system: ProbabilitySystem,
    unpacking: Unpacking | None = None,
    rule: str = "maximal",
    allow_non_web: bool = False,
) -> ExpansionResult:
    """Product of component tables over the intersection overlaps, renormalized by k.

    With ``allow_non_web`` a structure that cannot be unpacked uses the
    intersections over all component pairs; each such overlap is divided
    out once, using the table of the first component that contains it.
    """
    structure = system.structure
    if unpacking is None and allow_non_web and not is_web(structure):
        return _alternative_non_web(system, rule)
    if unpacking is None:
        unpacking = unpack(structure)
    stale = unpacking.ostar_rule is not None and unpacking.ostar_rule != rule
    if stale or any(s.intersection_overlaps is None for s in unpacking.steps):
        unpacking = intersection_overlaps(structure, unpacking, rule)
    factors = [(s.component, s.intersection_overlaps) for s in unpacking.steps]
    return _normalize(system, _alt_weights(system, factors), unpacking)


def _alternative_non_web(system: ProbabilitySystem, rule: str) -> ExpansionResult:
    structure: Structure = system.structure
    ostars = pairwise_intersections(structure, rule)
    assigned: dict[tuple, list] = {c: [] for c in structure.components}
    for s in ostars:
        owner = next(c for c in structure.components if s <= set(c))
        assigned[owner].append(s)
    return _normalize(system, _alt_weights(system, list(assigned.items())), None)


def _normalize(system, w, unpacking) -> ExpansionResult:
    total = float(w.sum())
    if total <= 0.0:
        raise AllZeroWeight("all joint states have zero weight")
    joint = JointDistribution(system.space, w / total)
    return ExpansionResult(joint, ALTERNATIVE, 1.0 / total, unpacking, weight_total=total)


def check_consistency(system: ProbabilitySystem, tol: float = 1e-9, max_iter: int = 10000) -> ConsistencyVerdict:
    """Decide whether some joint reproduces every component table.

    IPF from the uniform joint converges into the consistent set whenever
    that set is nonempty. A residual that stops falling while still above
    `tol` is reported as inconsistent; running out of iterations before
    either happens is undetermined.
    """
    run = _ipf.ipf(system, tol=tol, max_iter=max_iter)
    if run.status == _ipf.CONVERGED:
        witness = JointDistribution(system.space, run.joint / run.joint.sum())
        return ConsistencyVerdict(CONSISTENT, run.residual, witness, run.iterations)
    if run.status == _ipf.STALLED:
        return ConsistencyVerdict(INCONSISTENT, run.residual, None, run.iterations)
    return ConsistencyVerdict(UNDETERMINED, run.residual, None, run.iterations)


def check_conditional_consistency(
    joint: JointDistribution, system: ProbabilitySystem, unpacking: Unpacking | None = None
) -> ConditionalReport:
    """Compare the joint's P(tail | overlap) with each component's own conditional.

    Only overlap states where the joint has positive mass are compared.
    """
    if unpacking is None:
        unpacking = unpack(system.structure)
    names = system.space.names
    report = ConditionalReport()
    for step in unpacking.steps:
        comp = step.component
        overlap = step.ordered(step.overlap)
        joint_c = sum_to(joint.values, names, comp)
        joint_o = sum_to(joint.values, names, overlap)
        ours = condition(system.table(comp), overlap).values
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = broadcast_to_space(joint_o, overlap, system.table(comp).scope) if overlap else np.array(1.0)
            theirs = joint_c / np.where(denom > 0, denom, 1.0)
        mask = np.broadcast_to(denom > 0, joint_c.shape)
        dev = float(np.max(np.abs(theirs - ours)[mask])) if mask.any() else 0.0
        report.deviations.append((comp, dev))
    return report


def component_marginal_deviation(joint: JointDistribution, system: ProbabilitySystem) -> float:
    """Largest gap between the joint's component marginals and the system tables."""
    return _ipf.marginal_residual(joint.values, system)
