"""Maximum-entropy member of the consistent set, and sampling from that set."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import ipf as _ipf
from .expansion import INCONSISTENT, check_consistency, component_marginal_deviation, product_extension
from .model import JointDistribution
from .scoring import log_score, relative_score
from .system import ProbabilitySystem

log = logging.getLogger(__name__)

# floor on random starting weights keeps every start strictly positive
INIT_FLOOR = 1e-12


class Inconsistent(ValueError):
    """No joint distribution reproduces all component tables."""


class NotConverged(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class MaxentResult:
    joint: JointDistribution
    iterations: int
    residual: float
    entropy: float


def _require_consistent(system: ProbabilitySystem, tol: float, max_iter: int):
    verdict = check_consistency(system, tol=tol, max_iter=max_iter)
    if verdict.status == INCONSISTENT:
        raise Inconsistent(f"component tables admit no common joint (residual {verdict.residual:.3g})")
    return verdict


def maxent_fit(system: ProbabilitySystem, tol: float = 1e-10, max_iter: int = 10000) -> MaxentResult:
    """IPF from the uniform joint.

    Its limit is the I-projection of the uniform distribution onto the
    consistent set, which is the maximum-entropy member.
    """
    verdict = _require_consistent(system, tol, max_iter)
    if verdict.witness is None:
        raise NotConverged(f"residual {verdict.residual:.3g} after {verdict.iterations} sweeps")
    joint = verdict.witness
    return MaxentResult(joint, verdict.iterations, verdict.residual, -log_score(joint))


def random_start(space_shape, rng: np.random.Generator) -> np.ndarray:
    w = np.maximum(rng.uniform(0.0, 1.0, size=space_shape), INIT_FLOOR)
    return w / w.sum()


def sample_K(
    system: ProbabilitySystem,
    seed: int,
    count: int,
    init: str = "random",
    tol: float = 1e-10,
    max_iter: int = 10000,
) -> list[JointDistribution]:
    """`count` members of the consistent set.

    Each is the IPF limit from its own positive random start, drawn from
    ``default_rng([seed, index])``; ``init="uniform"`` starts every fit at
    the uniform joint instead, which yields the maxent member.
    """
    if init not in ("random", "uniform"):
        raise ValueError(f"init must be 'random' or 'uniform', not {init!r}")
    shape = system.space.shape
    out = []
    for index in range(count):
        start = None if init == "uniform" else random_start(shape, np.random.default_rng([seed, index]))
        run = _ipf.ipf(system, start=start, tol=tol, max_iter=max_iter)
        if run.status == _ipf.STALLED:
            raise Inconsistent(f"IPF stalled at residual {run.residual:.3g}")
        if run.status != _ipf.CONVERGED:
            raise NotConverged(f"sample {index}: residual {run.residual:.3g}")
        out.append(JointDistribution(system.space, run.joint / run.joint.sum()))
    return out


@dataclass
class ChainCheck:
    g_p: float
    g_p_maxent: float
    g_maxent: float

    @property
    def pythagorean_gap(self) -> float:
        return abs(self.g_p_maxent - self.g_maxent)


@dataclass
class GuaranteeChainReport:
    checks: list[ChainCheck] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_guarantee_chain(
    system: ProbabilitySystem,
    samples: list[JointDistribution],
    maxent: MaxentResult | None = None,
    tol: float = 1e-8,
    pythagorean_tol: float = 1e-6,
) -> GuaranteeChainReport:
    """Check G(P) >= G(P, P') >= G(P') and G(P, P') = G(P') for each sample P."""
    if maxent is None:
        maxent = maxent_fit(system)
    g_max = log_score(maxent.joint)
    report = GuaranteeChainReport()
    for i, p in enumerate(samples):
        c = ChainCheck(log_score(p), relative_score(p, maxent.joint), g_max)
        report.checks.append(c)
        if c.g_p < c.g_p_maxent - tol:
            report.violations.append(f"sample {i}: G(P)={c.g_p:.12g} < G(P,P')={c.g_p_maxent:.12g}")
        if c.g_p_maxent < c.g_maxent - tol:
            report.violations.append(f"sample {i}: G(P,P')={c.g_p_maxent:.12g} < G(P')={c.g_maxent:.12g}")
        if c.pythagorean_gap >= pythagorean_tol:
            report.violations.append(f"sample {i}: |G(P,P') - G(P')| = {c.pythagorean_gap:.3g}")
    return report


GAP_THRESHOLD = 1e-6


@dataclass
class MaxentGap:
    entropy_maxent: float
    entropy_px: float
    px_marginal_deviation: float

    @property
    def gap(self) -> float:
        return self.entropy_maxent - self.entropy_px

    @property
    def px_in_K(self) -> bool:
        return self.px_marginal_deviation < 1e-9


def maxent_gap(system: ProbabilitySystem, fit: MaxentResult | None = None) -> MaxentGap:
    """Entropy of the maxent member minus that of the product extension.

    When the product extension reproduces every table it already has the
    product form of an I-projection of the uniform joint, so the gap is
    zero; a gap under GAP_THRESHOLD is logged rather than treated as an error.
    """
    if fit is None:
        fit = maxent_fit(system)
    px = product_extension(system).joint
    out = MaxentGap(fit.entropy, -log_score(px), component_marginal_deviation(px, system))
    if out.gap <= GAP_THRESHOLD:
        log.info("maxent gap %.3g is below %.0e (product extension in K: %s)", out.gap, GAP_THRESHOLD, out.px_in_K)
    return out
