"""Logarithmic scores and the locally computable guaranteed scores.

Scores use the natural log and follow the higher-is-better convention:
G(P) = sum P ln P (negative entropy) and G(P, Q) = sum P ln Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expansion import ExpansionResult, alternative_model, product_extension
from .model import JointDistribution, ProbTable, marginalize, uniform
from .system import ProbabilitySystem
from .web import Unpacking, format_set, intersection_overlaps, unpack

NEG_INF = float("-inf")


class SpaceMismatch(ValueError):
    pass


def _values(dist) -> np.ndarray:
    if isinstance(dist, (JointDistribution, ProbTable)):
        return dist.values
    return np.asarray(dist, dtype=np.float64)


def log_score(dist) -> float:
    """Expected self-score G(P); 0 ln 0 counts as 0."""
    p = _values(dist).ravel()
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz])))


def entropy(dist) -> float:
    return -log_score(dist)


def relative_score(p, q) -> float:
    """G(P, Q) = sum_x P(x) ln Q(x); ``-inf`` when Q misses mass that P has."""
    if isinstance(p, JointDistribution) and isinstance(q, JointDistribution) and p.space != q.space:
        raise SpaceMismatch(f"{p.space.names} vs {q.space.names}")
    pv, qv = _values(p).ravel(), _values(q).ravel()
    if pv.shape != qv.shape:
        raise SpaceMismatch(f"{pv.size} states vs {qv.size} states")
    nz = pv > 0
    if np.any(qv[nz] <= 0):
        return NEG_INF
    return float(np.sum(pv[nz] * np.log(qv[nz])))


def kl_divergence(p, q) -> float:
    """D(P || Q) in nats."""
    return log_score(p) - relative_score(p, q)


@dataclass
class LocalScore:
    """A guaranteed score assembled from per-table terms.

    ``value`` equals the sum of component terms minus the sum of overlap
    terms, plus ``ln_k`` for the alternative model.
    """

    value: float
    component_terms: list[tuple[str, float]]
    overlap_terms: list[tuple[str, float]]
    ln_k: float = 0.0

    def reassemble(self) -> float:
        return sum(g for _, g in self.component_terms) - sum(g for _, g in self.overlap_terms) + self.ln_k


def _component_terms(system: ProbabilitySystem, unpacking: Unpacking) -> list[tuple[str, float]]:
    return [(format_set(s.component), log_score(system.table(s.component))) for s in unpacking.steps]


def guaranteed_score_standard(system: ProbabilitySystem, unpacking: Unpacking | None = None) -> LocalScore:
    """G(P, P^x) for any P consistent with the system, from the tables alone."""
    if unpacking is None:
        unpacking = unpack(system.structure)
    comps = _component_terms(system, unpacking)
    overlaps = []
    for s in unpacking.steps:
        if s.overlap:
            names = s.ordered(s.overlap)
            overlaps.append((format_set(names), log_score(marginalize(system.table(s.component), names))))
    value = sum(g for _, g in comps) - sum(g for _, g in overlaps)
    return LocalScore(value, comps, overlaps)


def guaranteed_score_alt(
    system: ProbabilitySystem,
    unpacking: Unpacking | None = None,
    k: float | None = None,
    rule: str = "maximal",
) -> LocalScore:
    """G(P, P*) for any P consistent with the system.

    `k` is the alternative model's normalizer; when omitted it is obtained
    by building the model, which is the only step that enumerates states.
    """
    if unpacking is None:
        unpacking = unpack(system.structure)
    stale = unpacking.ostar_rule is not None and unpacking.ostar_rule != rule
    if stale or any(s.intersection_overlaps is None for s in unpacking.steps):
        unpacking = intersection_overlaps(system.structure, unpacking, rule)
    if k is None:
        k = alternative_model(system, unpacking, rule).k
    ln_k = float(np.log(k))
    comps = _component_terms(system, unpacking)
    overlaps = []
    for s in unpacking.steps:
        for o in s.intersection_overlaps:
            names = s.ordered(o)
            overlaps.append((format_set(names), log_score(marginalize(system.table(s.component), names))))
    value = sum(g for _, g in comps) - sum(g for _, g in overlaps) + ln_k
    return LocalScore(value, comps, overlaps, ln_k)


@dataclass
class ScoreReport:
    g_guaranteed_standard: float
    g_guaranteed_alt: float
    ln_k: float
    k: float
    uniform_baseline: float
    standard_terms: LocalScore
    alt_terms: LocalScore
    unpacking: Unpacking
    g_self: float | None = None
    g_relative: float | None = None
    # direct enumerations against a consistent witness, when computed
    direct_standard: float | None = None
    direct_alt: float | None = None
    g_self_standard: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def per_term(self) -> list[tuple[str, float]]:
        return (
            [("+G(" + label + ")", g) for label, g in self.standard_terms.component_terms]
            + [("-G(" + label + ")", g) for label, g in self.standard_terms.overlap_terms]
        )


def score_report(
    system: ProbabilitySystem,
    unpacking: Unpacking | None = None,
    rule: str = "maximal",
    witness: JointDistribution | None = None,
) -> ScoreReport:
    """Both guaranteed scores, ln k and the uniform baseline.

    With a `witness` from the consistent set the direct relative scores
    of both models are also enumerated for cross-checking.
    """
    if unpacking is None:
        unpacking = unpack(system.structure)
    unpacking = intersection_overlaps(system.structure, unpacking, rule)
    alt: ExpansionResult = alternative_model(system, unpacking, rule)
    std = guaranteed_score_standard(system, unpacking)
    alt_score = guaranteed_score_alt(system, unpacking, k=alt.k, rule=rule)
    report = ScoreReport(
        g_guaranteed_standard=std.value,
        g_guaranteed_alt=alt_score.value,
        ln_k=alt_score.ln_k,
        k=alt.k,
        uniform_baseline=log_score(uniform(system.space)),
        standard_terms=std,
        alt_terms=alt_score,
        unpacking=unpacking,
    )
    if witness is not None:
        px = product_extension(system, unpacking).joint
        report.g_self = log_score(witness)
        report.direct_standard = relative_score(witness, px)
        report.direct_alt = relative_score(witness, alt.joint)
        report.g_relative = report.direct_standard
        report.g_self_standard = log_score(px)
    return report
