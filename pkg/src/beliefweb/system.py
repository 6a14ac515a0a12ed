"""Probability systems: one normalized table per component of a structure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import JointSpace, ProbTable, Variable, marginalize
from .web import Component, Structure


@dataclass(frozen=True, eq=False)
class ProbabilitySystem:
    space: JointSpace
    structure: Structure
    tables: tuple[ProbTable, ...]

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        if len(self.tables) != self.structure.m:
            raise ValueError(f"{self.structure.m} components but {len(self.tables)} tables")
        for comp, table in zip(self.structure.components, self.tables):
            if table.names != tuple(comp):
                raise ValueError(f"table scope {table.names} does not match component {comp}")
            for v in table.scope.variables:
                if self.space.variable(v.name) != v:
                    raise ValueError(f"variable {v} disagrees with the joint space")
        if set(self.structure.variables) != set(self.space.names):
            raise ValueError("every variable must belong to some component")

    @classmethod
    def from_tables(cls, tables: Sequence[ProbTable], variables: Sequence[Variable] | None = None):
        tables = tuple(tables)
        if variables is None:
            seen: dict[str, Variable] = {}
            for t in tables:
                for v in t.scope.variables:
                    seen.setdefault(v.name, v)
            variables = tuple(seen.values())
        structure = Structure(tuple(t.names for t in tables))
        return cls(JointSpace(tuple(variables)), structure, tables)

    def table(self, component: Sequence[str]) -> ProbTable:
        target = frozenset(component)
        for comp, t in zip(self.structure.components, self.tables):
            if frozenset(comp) == target:
                return t
        raise KeyError(f"no component {tuple(component)}")

    def marginal(self, component: Component, keep: Sequence[str]) -> ProbTable:
        """Marginal on `keep` taken from `component`'s own table."""
        return marginalize(self.table(component), keep)

    def __eq__(self, other):
        if not isinstance(other, ProbabilitySystem):
            return NotImplemented
        return (
            self.space == other.space
            and self.structure == other.structure
            and all(a == b for a, b in zip(self.tables, other.tables))
        )


def system_from_arrays(structure: Structure, arrays: Sequence[np.ndarray], cards: dict[str, int] | None = None):
    """Wrap raw arrays (axes in component order) as a system."""
    cards = dict(cards or {})
    for comp, arr in zip(structure.components, arrays):
        for name, size in zip(comp, np.shape(arr)):
            cards.setdefault(name, size)
    variables = tuple(Variable(n, cards.get(n, 2)) for n in structure.variables)
    space = JointSpace(variables)
    tables = tuple(ProbTable(space.subspace(c), a) for c, a in zip(structure.components, arrays))
    return ProbabilitySystem(space, structure, tables)
