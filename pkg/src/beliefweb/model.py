"""Discrete variables, state spaces and probability tables.

Tables are dense numpy arrays with one axis per variable in scope order.
Flattening with C order gives the row-major enumeration used everywhere
in this package (last listed variable varies fastest).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-9


class ScopeError(ValueError):
    """Raised when a requested variable subset is not part of a table's scope."""


@dataclass(frozen=True)
class Variable:
    name: str
    card: int = 2

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("variable name must be a non-empty string")
        if int(self.card) < 2:
            raise ValueError(f"variable {self.name!r} needs cardinality >= 2, got {self.card}")


@dataclass(frozen=True)
class JointSpace:
    variables: tuple[Variable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.card for v in self.variables)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise ScopeError(f"unknown variable {name!r}")

    def subspace(self, names: Iterable[str]) -> "JointSpace":
        return JointSpace(tuple(self.variable(n) for n in names))


def enumerate_states(space: JointSpace) -> list[tuple[int, ...]]:
    """All joint states of `space`, row-major with the last variable fastest."""
    return list(itertools.product(*(range(c) for c in space.shape)))


def _as_array(values, shape) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size != int(np.prod(shape, dtype=np.int64)):
        raise ValueError(f"expected {int(np.prod(shape))} values, got {arr.size}")
    return arr.reshape(shape)


@dataclass(frozen=True, eq=False)
class ProbTable:
    """Normalized joint table over an ordered scope."""

    scope: JointSpace
    values: np.ndarray

    def __post_init__(self):
        arr = _as_array(self.values, self.scope.shape)
        if np.any(arr < -NORM_TOL) or not np.all(np.isfinite(arr)):
            raise ValueError("probabilities must be finite and nonnegative")
        total = arr.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"table over {self.scope.names} sums to {total!r}, not 1")
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_flat(cls, variables: Sequence[Variable], probs) -> "ProbTable":
        return cls(JointSpace(tuple(variables)), probs)

    @property
    def names(self) -> tuple[str, ...]:
        return self.scope.names

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __eq__(self, other):
        if not isinstance(other, ProbTable):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"ProbTable({''.join(self.names) if all(len(n) == 1 for n in self.names) else self.names}, {self.flat.tolist()})"


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense distribution over every state of a joint space."""

    space: JointSpace
    values: np.ndarray

    def __post_init__(self):
        arr = _as_array(self.values, self.space.shape)
        if np.any(arr < -NORM_TOL) or not np.all(np.isfinite(arr)):
            raise ValueError("joint values must be finite and nonnegative")
        total = arr.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"joint sums to {total!r}, not 1")
        arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def as_table(self) -> ProbTable:
        return ProbTable(self.space, self.values)

    def marginal(self, keep: Sequence[str]) -> ProbTable:
        return marginalize(self.as_table(), keep)

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """P(scope minus given | given), laid out on the axes of the source table.

    Every slice with a fixed `given` state sums to one. Slices whose
    given-marginal was zero are uniform; `zero_marginal` records this.
    """

    scope: JointSpace
    given: tuple[str, ...]
    values: np.ndarray
    zero_marginal: bool = False
    zero_states: tuple[tuple[int, ...], ...] = field(default=())


def sum_to(values: np.ndarray, names: Sequence[str], keep: Sequence[str]) -> np.ndarray:
    """Sum a labelled array down to `keep`, with axes in `keep` order."""
    names = list(names)
    missing = [k for k in keep if k not in names]
    if missing:
        raise ScopeError(f"{missing} not in scope {tuple(names)}")
    if len(set(keep)) != len(keep):
        raise ScopeError(f"repeated variables in {tuple(keep)}")
    drop = tuple(i for i, n in enumerate(names) if n not in keep)
    reduced = values.sum(axis=drop) if drop else values
    remaining = [n for n in names if n in keep]
    return np.transpose(reduced, [remaining.index(k) for k in keep])


def broadcast_to_space(values: np.ndarray, names: Sequence[str], space: JointSpace) -> np.ndarray:
    """View a labelled array with singleton axes for every variable of `space` it lacks."""
    order = sorted(range(len(names)), key=lambda i: space.names.index(names[i]))
    arr = np.transpose(values, order)
    shape = [space.shape[j] if space.names[j] in names else 1 for j in range(len(space.names))]
    return arr.reshape(shape)


def marginalize(table: ProbTable, keep: Sequence[str]) -> ProbTable:
    """Marginal of `table` on the variables `keep`, in the order given."""
    keep = tuple(keep)
    arr = sum_to(table.values, table.names, keep)
    return ProbTable(table.scope.subspace(keep), arr)


def condition(table: ProbTable, given: Sequence[str]) -> ConditionalTable:
    given = tuple(given)
    if not given:
        return ConditionalTable(table.scope, (), np.array(table.values))
    marg = sum_to(table.values, table.names, given)
    marg_b = broadcast_to_space(marg, given, table.scope)
    free = [n for n in table.names if n not in given]
    n_free = int(np.prod([table.scope.variable(n).card for n in free], dtype=np.int64))
    zero = marg_b <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(zero, 1.0 / n_free, table.values / np.where(zero, 1.0, marg_b))
    zero_states = tuple(tuple(int(i) for i in s) for s in np.argwhere(marg <= 0.0))
    return ConditionalTable(table.scope, given, cond, bool(zero_states), zero_states)


def uniform(space: JointSpace) -> JointDistribution:
    return JointDistribution(space, np.full(space.shape, 1.0 / space.size))
