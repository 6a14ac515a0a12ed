"""Random systems and the Monte Carlo comparison of the two expansions."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expansion import alternative_model, product_extension
from .model import JointDistribution, JointSpace, Variable, sum_to
from .scoring import guaranteed_score_alt, guaranteed_score_standard, log_score
from .system import ProbabilitySystem, system_from_arrays
from .web import OSTAR_RULES, Structure, intersection_overlaps, iter_unpackings, preferred_unpacking, unpack

log = logging.getLogger(__name__)

TIE_TOL = 1e-12
THEOREM_TOL = 1e-10
PROBE_MAX_COMPONENTS = 10

CSV_HEADER = ("trial", "k", "ln_k", "g_standard", "g_alt", "gap", "partition", "winner")

PRESETS = {
    "fig1": "AB,AC,BCD",
    "fig1-dag": "A,AB,AC,BCD",
    "chain3": "AB,BC,CD",
    "chain5": "AB,BC,CD,DE,EF",
    "star3": "AB,AC,AD",
    "star5": "AB,AC,AD,AE,AF",
    "diamond": "ABC,BCD,CDE",
    "triangle": "AB,BC,CA",
}


def preset(name: str) -> Structure:
    try:
        return Structure.parse(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# ---------------------------------------------------------------------------
# random structures and systems


def _names(n: int) -> list[str]:
    if n <= 26:
        return list(string.ascii_uppercase[:n])
    return [f"X{i}" for i in range(n)]


def chain_structure(m: int) -> Structure:
    names = _names(m + 1)
    return Structure(tuple((names[i], names[i + 1]) for i in range(m)))


def star_structure(m: int) -> Structure:
    names = _names(m + 1)
    return Structure(tuple((names[0], names[i + 1]) for i in range(m)))


def random_web(
    rng: np.random.Generator,
    m: int,
    max_tail: int = 2,
    max_overlap: int = 3,
    max_vars: int = 10,
    tree: bool = False,
) -> Structure:
    """Grow a web by reverse unpacking: each new component brings fresh tail variables.

    With ``tree=True`` every overlap is drawn from a single earlier
    component, which yields a hypertree.
    """
    pool = _names(max_vars)
    used: list[str] = []
    comps: list[tuple[str, ...]] = []
    for i in range(m):
        room = max_vars - len(used)
        if room <= 0:
            break
        n_tail = int(rng.integers(1, min(max_tail, room) + 1))
        tail = pool[len(used): len(used) + n_tail]
        if comps:
            source = list(comps[int(rng.integers(len(comps)))]) if tree else list(used)
            n_over = int(rng.integers(0, min(max_overlap, len(source)) + 1))
            overlap = [str(v) for v in rng.choice(source, size=n_over, replace=False)] if n_over else []
        else:
            overlap = []
        used.extend(tail)
        comps.append(tuple(sorted(overlap)) + tuple(tail))
    order = rng.permutation(len(comps))
    return Structure(tuple(comps[i] for i in order))


def random_joint(space: JointSpace, rng: np.random.Generator) -> np.ndarray:
    w = rng.uniform(0.0, 1.0, size=space.shape)
    return w / w.sum()


def _space(structure: Structure, cards: dict[str, int] | None) -> JointSpace:
    cards = cards or {}
    return JointSpace(tuple(Variable(n, cards.get(n, 2)) for n in structure.variables))


def random_consistent_system(
    structure: Structure, seed: int, cards: dict[str, int] | None = None
) -> ProbabilitySystem:
    """Component tables taken as exact marginals of one positive random joint."""
    space = _space(structure, cards)
    p0 = random_joint(space, np.random.default_rng(seed))
    arrays = [sum_to(p0, space.names, c) for c in structure.components]
    return system_from_arrays(structure, arrays, {v.name: v.card for v in space.variables})


def random_generator_joint(structure: Structure, seed: int, cards: dict[str, int] | None = None) -> JointDistribution:
    """The joint that `random_consistent_system` with the same arguments marginalizes."""
    space = _space(structure, cards)
    return JointDistribution(space, random_joint(space, np.random.default_rng(seed)))


def random_system(structure: Structure, seed: int, cards: dict[str, int] | None = None) -> ProbabilitySystem:
    """Independently drawn component tables; overlap marginals generally disagree."""
    space = _space(structure, cards)
    rng = np.random.default_rng(seed)
    arrays = []
    for c in structure.components:
        sub = space.subspace(c)
        arrays.append(random_joint(sub, rng))
    return system_from_arrays(structure, arrays, {v.name: v.card for v in space.variables})


# ---------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentConfig:
    structure: Structure
    trials: int = 1000
    seed: int = 0
    ostar_rule: str = "maximal"
    out: str | None = None
    cards: dict[str, int] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.ostar_rule not in OSTAR_RULES:
            raise ValueError(f"ostar_rule must be one of {OSTAR_RULES}")


@dataclass(frozen=True)
class ExperimentRecord:
    trial: int
    k: float
    ln_k: float
    g_standard: float
    g_alt: float
    gap: float
    partition_condition_holds: bool
    winner: str
    error: str | None = None


def winner_for(gap: float) -> str:
    if gap > TIE_TOL:
        return "alt"
    if gap < -TIE_TOL:
        return "standard"
    return "tie"


def run_trial(structure: Structure, seed: int, trial: int, rule: str = "maximal", cards=None) -> ExperimentRecord:
    try:
        system = random_consistent_system(structure, seed + trial, cards)
        unpacking = intersection_overlaps(structure, preferred_unpacking(structure), rule)
        alt = alternative_model(system, unpacking, rule)
        g_std = guaranteed_score_standard(system, unpacking).value
        g_alt = guaranteed_score_alt(system, unpacking, k=alt.k, rule=rule).value
    except Exception as exc:  # recorded per trial, never fatal
        nan = float("nan")
        return ExperimentRecord(trial, nan, nan, nan, nan, nan, False, "error", f"{type(exc).__name__}: {exc}")
    gap = g_alt - g_std
    return ExperimentRecord(trial, alt.k, alt.ln_k, g_std, g_alt, gap, unpacking.partition_holds, winner_for(gap))


def _trial_star(args):
    return run_trial(*args)


@dataclass
class ExperimentSummary:
    trials: int
    completed: int
    failures: int
    alt_wins: int
    standard_wins: int
    ties: int
    mean_gap: float
    min_gap: float
    max_gap: float
    alt_win_fraction: float
    k_below_1: int
    alt_win_fraction_k_below_1: float | None
    k_at_least_1: int
    alt_win_fraction_k_at_least_1: float | None
    partition_trials: int
    theorem_violations: int

    def lines(self) -> list[str]:
        def frac(x):
            return "n/a" if x is None else f"{x:.6f}"

        return [
            f"trials = {self.trials}",
            f"completed = {self.completed}",
            f"failures = {self.failures}",
            f"alt_wins = {self.alt_wins}",
            f"standard_wins = {self.standard_wins}",
            f"ties = {self.ties}",
            f"alt_win_fraction = {self.alt_win_fraction:.6f}",
            f"mean_gap = {self.mean_gap:.12g}",
            f"min_gap = {self.min_gap:.12g}",
            f"max_gap = {self.max_gap:.12g}",
            f"k_below_1 = {self.k_below_1}",
            f"alt_win_fraction_k_below_1 = {frac(self.alt_win_fraction_k_below_1)}",
            f"k_at_least_1 = {self.k_at_least_1}",
            f"alt_win_fraction_k_at_least_1 = {frac(self.alt_win_fraction_k_at_least_1)}",
            f"partition_trials = {self.partition_trials}",
            f"theorem_violations = {self.theorem_violations}",
        ]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[ExperimentRecord]
    summary: ExperimentSummary
    failures: list[tuple[int, str]] = field(default_factory=list)


def summarize(records: Sequence[ExperimentRecord]) -> ExperimentSummary:
    ok = [r for r in records if r.error is None]
    gaps = np.array([r.gap for r in ok]) if ok else np.array([np.nan])

    def alt_frac(rows):
        return None if not rows else sum(r.winner == "alt" for r in rows) / len(rows)

    below = [r for r in ok if r.k < 1.0]
    above = [r for r in ok if r.k >= 1.0]
    violations = [
        r for r in ok if r.partition_condition_holds and r.k >= 1.0 and r.g_alt < r.g_standard - THEOREM_TOL
    ]
    n_ok = len(ok)
    return ExperimentSummary(
        trials=len(records),
        completed=n_ok,
        failures=len(records) - n_ok,
        alt_wins=sum(r.winner == "alt" for r in ok),
        standard_wins=sum(r.winner == "standard" for r in ok),
        ties=sum(r.winner == "tie" for r in ok),
        mean_gap=float(np.mean(gaps)),
        min_gap=float(np.min(gaps)),
        max_gap=float(np.max(gaps)),
        alt_win_fraction=(alt_frac(ok) or 0.0),
        k_below_1=len(below),
        alt_win_fraction_k_below_1=alt_frac(below),
        k_at_least_1=len(above),
        alt_win_fraction_k_at_least_1=alt_frac(above),
        partition_trials=sum(r.partition_condition_holds for r in ok),
        theorem_violations=len(violations),
    )


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every trial, seeded by ``config.seed + trial``; output order is trial order."""
    args = [(config.structure, config.seed, t, config.ostar_rule, config.cards) for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_trial_star, args, chunksize=max(1, config.trials // (4 * config.workers))))
    else:
        records = [run_trial(*a) for a in args]
    records.sort(key=lambda r: r.trial)
    failures = [(r.trial, r.error) for r in records if r.error is not None]
    for t, err in failures:
        log.warning("trial %d failed: %s", t, err)
    result = ExperimentResult(config, records, summarize(records), failures)
    if config.out:
        write_csv(records, config.out)
    return result


def format_float(x: float) -> str:
    """12 significant digits; exponent notation only below 1e-4 in magnitude."""
    if x != x:
        return "nan"
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([
            r.trial,
            format_float(r.k),
            format_float(r.ln_k),
            format_float(r.g_standard),
            format_float(r.g_alt),
            format_float(r.gap),
            "true" if r.partition_condition_holds else "false",
            r.winner,
        ])
    return buf.getvalue()


def write_csv(records: Sequence[ExperimentRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(records_to_csv(records))


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for key in ("k", "ln_k", "g_standard", "g_alt", "gap"):
            row[key] = float(row[key])
        row["trial"] = int(row["trial"])
        row["partition"] = row["partition"] == "true"
    return rows


# ---------------------------------------------------------------------------
# probes


@dataclass
class InvarianceReport:
    orders: list[tuple[tuple[str, ...], ...]]
    scores: list[float]
    tree_flags: list[bool]
    max_joint_deviation: float
    max_score_deviation: float
    # the same maxima restricted to unpackings whose overlaps each sit in one remaining component
    max_joint_deviation_tree: float
    max_score_deviation_tree: float

    @property
    def n_unpackings(self) -> int:
        return len(self.orders)


def _is_tree_unpacking(unpacking) -> bool:
    order = unpacking.order
    return all(
        not step.overlap or any(step.overlap <= set(c) for c in order[i + 1:])
        for i, step in enumerate(unpacking.steps)
    )


def _max_pairwise(values, metric) -> float:
    return max((metric(a, b) for a, b in itertools.combinations(values, 2)), default=0.0)


def unpacking_invariance_probe(
    structure: Structure, system: ProbabilitySystem, max_components: int = PROBE_MAX_COMPONENTS
) -> InvarianceReport:
    """Product extension and its guaranteed score under every admissible unpacking."""
    if structure.m > max_components:
        raise ValueError(f"{structure.m} components exceeds the probe cutoff of {max_components}")
    joints, scores, orders, trees = [], [], [], []
    for unpacking in iter_unpackings(structure):
        orders.append(unpacking.order)
        trees.append(_is_tree_unpacking(unpacking))
        joints.append(product_extension(system, unpacking).joint.values)
        scores.append(guaranteed_score_standard(system, unpacking).value)
    if not orders:
        raise ValueError("structure is not a web")

    def joint_dev(a, b):
        return float(np.max(np.abs(a - b)))

    def score_dev(a, b):
        return abs(a - b)

    tree_joints = [j for j, t in zip(joints, trees) if t]
    tree_scores = [g for g, t in zip(scores, trees) if t]
    return InvarianceReport(
        orders,
        scores,
        trees,
        _max_pairwise(joints, joint_dev),
        _max_pairwise(scores, score_dev),
        _max_pairwise(tree_joints, joint_dev),
        _max_pairwise(tree_scores, score_dev),
    )


@dataclass
class PromiseSearch:
    """How often G(P^x) lies above or below the guaranteed G(P, P^x)."""

    promise_above: int = 0
    promise_below: int = 0
    equal: int = 0
    examples: list[tuple[int, float, float]] = field(default_factory=list)


def promise_vs_guarantee(structure: Structure, seeds: Sequence[int], cards=None, tol: float = 1e-9) -> PromiseSearch:
    """Compare what P^x promises for itself with what it is guaranteed, over random consistent systems."""
    out = PromiseSearch()
    unpacking = unpack(structure)
    for seed in seeds:
        system = random_consistent_system(structure, seed, cards)
        promised = log_score(product_extension(system, unpacking).joint)
        guaranteed = guaranteed_score_standard(system, unpacking).value
        if promised > guaranteed + tol:
            out.promise_above += 1
        elif promised < guaranteed - tol:
            out.promise_below += 1
        else:
            out.equal += 1
        if len(out.examples) < 10:
            out.examples.append((seed, promised, guaranteed))
    return out
