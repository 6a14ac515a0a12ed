"""JSON system files.

    {"variables": [{"name": "A", "card": 2}, ...],
     "components": [{"vars": ["A", "B"], "probs": [0.3, 0.2, 0.1, 0.4]}, ...]}

``probs`` is row-major over ``vars`` with the last variable fastest.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .model import JointSpace, ProbTable, Variable
from .system import ProbabilitySystem
from .web import Structure

log = logging.getLogger(__name__)

LOAD_TOL = 1e-6
WARN_TOL = 1e-9
RENORM_TOL = 1e-15


class SystemFileError(ValueError):
    code = "format"


class NormalizationError(SystemFileError):
    code = "normalization"


@dataclass
class ValidationReport:
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    sums: list[tuple[tuple[str, ...], float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _parse_variables(doc) -> tuple[Variable, ...]:
    if not isinstance(doc, dict) or "variables" not in doc or "components" not in doc:
        raise SystemFileError("expected an object with 'variables' and 'components'")
    try:
        return tuple(Variable(str(v["name"]), int(v["card"])) for v in doc["variables"])
    except (KeyError, TypeError) as exc:
        raise SystemFileError(f"bad variable entry: {exc}") from None


def parse_structure(doc) -> tuple[JointSpace, Structure]:
    """Variables and components only; ``probs`` may be absent."""
    variables = _parse_variables(doc)
    space = JointSpace(variables)
    comps = []
    for entry in doc["components"]:
        names = tuple(entry["vars"]) if isinstance(entry, dict) else tuple(entry)
        for n in names:
            space.variable(n)
        comps.append(names)
    structure = Structure(tuple(comps))
    if set(structure.variables) != set(space.names):
        raise SystemFileError("every declared variable must appear in some component")
    return space, structure


def validate_doc(doc) -> tuple[ProbabilitySystem | None, ValidationReport]:
    report = ValidationReport()
    try:
        space, structure = parse_structure(doc)
    except (SystemFileError, ValueError, KeyError, TypeError) as exc:
        report.errors.append(("format", str(exc)))
        return None, report
    tables = []
    for entry, comp in zip(doc["components"], structure.components):
        sub = space.subspace(comp)
        probs = np.asarray(entry.get("probs", []), dtype=np.float64)
        if probs.size != sub.size:
            report.errors.append(("format", f"component {comp}: {probs.size} probs for {sub.size} states"))
            continue
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            report.errors.append(("normalization", f"component {comp}: negative or non-finite probability"))
            continue
        total = float(probs.sum())
        report.sums.append((comp, total))
        dev = abs(total - 1.0)
        if dev > LOAD_TOL:
            report.errors.append(("normalization", f"component {comp}: probabilities sum to {total:.12g}"))
            continue
        if dev > WARN_TOL:
            report.warnings.append(f"component {comp}: sum {total:.12g} renormalized")
        if dev > RENORM_TOL:
            probs = probs / total
        tables.append(ProbTable(sub, probs))
    if report.errors:
        return None, report
    return ProbabilitySystem(space, structure, tuple(tables)), report


def loads_system(text: str) -> ProbabilitySystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"invalid JSON: {exc}") from None
    system, report = validate_doc(doc)
    if system is None:
        code, msg = report.errors[0]
        raise (NormalizationError if code == "normalization" else SystemFileError)(msg)
    for w in report.warnings:
        log.warning(w)
    return system


def load_system(path) -> ProbabilitySystem:
    with open(path, encoding="utf-8") as fh:
        return loads_system(fh.read())


def system_to_doc(system: ProbabilitySystem) -> dict:
    return {
        "variables": [{"name": v.name, "card": v.card} for v in system.space.variables],
        "components": [
            {"vars": list(t.names), "probs": [float(x) for x in t.flat]} for t in system.tables
        ],
    }


def dumps_system(system: ProbabilitySystem) -> str:
    return json.dumps(system_to_doc(system), indent=2) + "\n"


def save_system(system: ProbabilitySystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_system(system))


def load_structure(path) -> tuple[Structure, dict[str, int]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    space, structure = parse_structure(doc)
    return structure, {v.name: v.card for v in space.variables}
