"""Structures of components, unpackings and structure classification.

A structure is a list of components (variable-name tuples). A component is
terminal when it holds a variable no other component has. A web is a
structure that can be emptied by removing terminal components one at a
time; the removal order is an unpacking.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Sequence

Component = tuple[str, ...]

OSTAR_RULES = ("maximal", "all-distinct")

NON_WEB = "non_web"
WEB = "web"
DAG_LIKE = "dag_like"
HYPERTREE = "hypertree"


class NotAWeb(ValueError):
    """The structure has a stage with no terminal component."""


def _key(component: Sequence[str]) -> tuple[str, ...]:
    return tuple(sorted(component))


@dataclass(frozen=True)
class Structure:
    components: tuple[Component, ...]

    def __post_init__(self):
        comps = tuple(tuple(c) for c in self.components)
        if not comps:
            raise ValueError("a structure needs at least one component")
        seen = set()
        for c in comps:
            if not c:
                raise ValueError("empty component")
            if len(set(c)) != len(c):
                raise ValueError(f"component {c} repeats a variable")
            if frozenset(c) in seen:
                raise ValueError(f"duplicate component {c}")
            seen.add(frozenset(c))
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, spec: str | Sequence) -> "Structure":
        """Build from ``"AB,AC,BCD"`` (one-letter names) or a list of name lists."""
        if isinstance(spec, str):
            return cls(tuple(tuple(part.strip()) for part in spec.split(",") if part.strip()))
        return cls(tuple(tuple(c) for c in spec))

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def variables(self) -> tuple[str, ...]:
        out: list[str] = []
        for c in self.components:
            out.extend(v for v in c if v not in out)
        return tuple(out)

    def label(self, component: Sequence[str]) -> str:
        return format_set(component)

    def __str__(self):
        return ",".join(format_set(c) for c in self.components)


def format_set(names) -> str:
    names = list(names)
    if not names:
        return "{}"
    if all(len(n) == 1 for n in names):
        return "".join(names)
    return "{" + ",".join(names) + "}"


@dataclass(frozen=True)
class UnpackingStep:
    component: Component
    tail: frozenset[str]
    overlap: frozenset[str]
    intersection_overlaps: tuple[frozenset[str], ...] | None = None

    def ordered(self, names: frozenset[str]) -> tuple[str, ...]:
        """`names` in this step's component order."""
        return tuple(v for v in self.component if v in names)

    @property
    def partition_holds(self) -> bool:
        """True when the intersection overlaps are disjoint and cover the overlap."""
        if self.intersection_overlaps is None:
            raise ValueError("intersection overlaps not computed")
        union: set[str] = set()
        for s in self.intersection_overlaps:
            if union & s:
                return False
            union |= s
        return union == set(self.overlap)


@dataclass(frozen=True)
class Unpacking:
    steps: tuple[UnpackingStep, ...]
    ostar_rule: str | None = field(default=None)

    @property
    def order(self) -> tuple[Component, ...]:
        return tuple(s.component for s in self.steps)

    @property
    def partition_holds(self) -> bool:
        return all(s.partition_holds for s in self.steps)


def _terminal_indices(comps: Sequence[Component], remaining: Sequence[int]) -> list[int]:
    counts: dict[str, int] = {}
    for i in remaining:
        for v in comps[i]:
            counts[v] = counts.get(v, 0) + 1
    return [i for i in remaining if any(counts[v] == 1 for v in comps[i])]


def find_terminals(structure: Structure) -> list[Component]:
    comps = structure.components
    return [comps[i] for i in _terminal_indices(comps, range(len(comps)))]


def _step(comps: Sequence[Component], i: int, rest: Sequence[int]) -> UnpackingStep:
    others: set[str] = set()
    for j in rest:
        others.update(comps[j])
    c = comps[i]
    return UnpackingStep(c, frozenset(v for v in c if v not in others), frozenset(v for v in c if v in others))


def unpack(structure: Structure) -> Unpacking:
    """Deterministic unpacking of a web.

    When several components are terminal at once the one whose sorted name
    tuple is lexicographically greatest is removed first, so for
    ``AB,AC,BCD`` the order is BCD, AC, AB.
    """
    comps = structure.components
    remaining = list(range(len(comps)))
    steps = []
    while remaining:
        terms = _terminal_indices(comps, remaining)
        if not terms:
            left = ",".join(format_set(comps[i]) for i in remaining)
            raise NotAWeb(f"no terminal component among {left}")
        pick = max(terms, key=lambda i: _key(comps[i]))
        remaining.remove(pick)
        steps.append(_step(comps, pick, remaining))
    return Unpacking(tuple(steps))


def iter_unpackings(structure: Structure) -> Iterator[Unpacking]:
    """Every admissible unpacking, by backtracking over terminal choices."""
    comps = structure.components

    def rec(remaining: tuple[int, ...], prefix: tuple[UnpackingStep, ...]):
        if not remaining:
            yield Unpacking(prefix)
            return
        for i in sorted(_terminal_indices(comps, remaining), key=lambda i: _key(comps[i]), reverse=True):
            rest = tuple(j for j in remaining if j != i)
            yield from rec(rest, prefix + (_step(comps, i, rest),))

    yield from rec(tuple(range(len(comps))), ())


def _maximal_distinct(sets: Sequence[frozenset[str]], keep_non_maximal: bool) -> tuple[frozenset[str], ...]:
    distinct: list[frozenset[str]] = []
    for s in sets:
        if s and s not in distinct:
            distinct.append(s)
    if keep_non_maximal:
        return tuple(distinct)
    return tuple(s for s in distinct if not any(s < t for t in distinct))


def intersection_overlaps(structure: Structure, unpacking: Unpacking, rule: str = "maximal") -> Unpacking:
    """Attach to each step its overlaps taken as set intersections.

    For step i these are the distinct nonempty intersections of the step's
    component with each component still remaining after it. Under the
    ``maximal`` rule intersections strictly contained in another one are
    dropped; ``all-distinct`` keeps them.
    """
    if rule not in OSTAR_RULES:
        raise ValueError(f"unknown O* rule {rule!r}; expected one of {OSTAR_RULES}")
    order = unpacking.order
    if sorted(map(_key, order)) != sorted(map(_key, structure.components)):
        raise ValueError("unpacking does not cover the structure's components")
    steps = []
    for i, step in enumerate(unpacking.steps):
        c = frozenset(step.component)
        inters = [c & frozenset(later) for later in order[i + 1:]]
        # canonical order keeps output stable across equivalent unpackings
        ostar = sorted(_maximal_distinct(inters, rule == "all-distinct"), key=lambda s: step.ordered(s))
        steps.append(replace(step, intersection_overlaps=tuple(ostar)))
    return Unpacking(tuple(steps), ostar_rule=rule)


def pairwise_intersections(structure: Structure, rule: str = "maximal") -> tuple[frozenset[str], ...]:
    """Order-free overlaps for arbitrary structures: intersections over all component pairs."""
    if rule not in OSTAR_RULES:
        raise ValueError(f"unknown O* rule {rule!r}")
    comps = [frozenset(c) for c in structure.components]
    inters = [comps[i] & comps[j] for i in range(len(comps)) for j in range(i + 1, len(comps))]
    return _maximal_distinct(inters, rule == "all-distinct")


def is_web(structure: Structure) -> bool:
    try:
        unpack(structure)
    except NotAWeb:
        return False
    return True


def _search(structure: Structure, ok_step) -> Unpacking | None:
    comps = structure.components

    @lru_cache(maxsize=None)
    def rec(remaining: frozenset[int]):
        if not remaining:
            return ()
        terms = sorted(_terminal_indices(comps, sorted(remaining)), key=lambda i: _key(comps[i]), reverse=True)
        for i in terms:
            rest = remaining - {i}
            step = _step(comps, i, sorted(rest))
            if ok_step(step, rest):
                tail = rec(rest)
                if tail is not None:
                    return (step,) + tail
        return None

    steps = rec(frozenset(range(len(comps))))
    return None if steps is None else Unpacking(steps)


def dag_unpacking(structure: Structure) -> Unpacking | None:
    """An unpacking whose tails are all single variables, if one exists."""
    return _search(structure, lambda step, rest: len(step.tail) == 1)


def hypertree_unpacking(structure: Structure) -> Unpacking | None:
    """An unpacking whose every overlap sits inside one remaining component, if one exists."""
    comps = structure.components
    return _search(
        structure,
        lambda step, rest: not step.overlap or any(step.overlap <= set(comps[j]) for j in rest),
    )


def classify(structure: Structure) -> frozenset[str]:
    """Label set among non_web, web, dag_like and hypertree.

    dag_like and hypertree are existence claims over all unpackings; the
    search is memoized on the set of remaining components.
    """
    if not is_web(structure):
        return frozenset({NON_WEB})
    labels = {WEB}
    if dag_unpacking(structure) is not None:
        labels.add(DAG_LIKE)
    if hypertree_unpacking(structure) is not None:
        labels.add(HYPERTREE)
    return frozenset(labels)


def preferred_unpacking(structure: Structure) -> Unpacking:
    """A hypertree unpacking when the structure admits one, else `unpack`.

    On hypertrees this is the ordering under which the intersection
    overlaps coincide with the overlaps.
    """
    tree = hypertree_unpacking(structure)
    return tree if tree is not None else unpack(structure)
